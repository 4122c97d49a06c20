//! Structured direct solver for connected pieces of a Liouvillian.
//!
//! A breadth-first search from a root orders the unknowns into levels such
//! that every nonzero couples a level only to itself or its neighbours. The
//! matrix is then block tridiagonal and is eliminated from the deepest level
//! upward with dense LU on each diagonal block. An optional border row (the
//! trace functional) replaces the root equation.

use num_complex::Complex64;

use super::density::UnionFind;
use crate::dense::{DenseMatrix, Lu, SingularPivot};
use crate::sparse::CscMatrix;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Connected components of the symmetrized nonzero pattern.
pub(crate) fn components(m: &CscMatrix) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(m.ncols());
    for (i, j, _) in m.iter() {
        uf.union(i, j);
    }
    uf.groups()
}

/// BFS levels of the symmetrized pattern, root first. Only nodes reachable
/// from the root are included.
pub(crate) fn bfs_levels(m: &CscMatrix, root: usize) -> Vec<Vec<usize>> {
    let t = m.transpose();
    let n = m.ncols();
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut levels = vec![vec![root]];
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &u in m.col(v).0.iter().chain(t.col(v).0) {
                if !seen[u] {
                    seen[u] = true;
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        levels.push(next);
    }
    levels
}

struct Coupling {
    /// Positions (within the previous level) of nonzero columns of E_k.
    cols: Vec<usize>,
    /// S_k^{-1} E_k restricted to `cols`.
    g: DenseMatrix,
    /// Reduced border row on this level, when bordered.
    border: Vec<Complex64>,
}

/// Factorization of a block-tridiagonal ordering, optionally bordered.
pub(crate) struct LevelFactor {
    levels: Vec<Vec<usize>>,
    n: usize,
    lu: Vec<Option<Lu>>,
    coupling: Vec<Option<Coupling>>,
    /// F_k = M[L_k, L_{k+1}] in level-local indices.
    upper: Vec<CscMatrix>,
    /// Reduced border value on the root (bordered case).
    tau: Complex64,
    bordered: bool,
    min_pivot_ratio: f64,
}

impl LevelFactor {
    /// Factors `m` with levels grown from `root`. With `border = Some(t)` the
    /// root's equation is replaced by `t · x = β`.
    pub(crate) fn new(
        m: &CscMatrix,
        root: usize,
        border: Option<&[Complex64]>,
    ) -> Result<Self, SingularPivot> {
        let n = m.ncols();
        let levels = bfs_levels(m, root);
        assert_eq!(
            levels.iter().map(Vec::len).sum::<usize>(),
            n,
            "level solver needs a connected pattern"
        );
        let nl = levels.len();
        let mut level_of = vec![0usize; n];
        let mut pos = vec![0usize; n];
        for (k, lv) in levels.iter().enumerate() {
            for (p, &v) in lv.iter().enumerate() {
                level_of[v] = k;
                pos[v] = p;
            }
        }
        let bordered = border.is_some();

        let mut diag_t: Vec<Vec<(usize, usize, Complex64)>> = vec![Vec::new(); nl];
        let mut lower_t: Vec<Vec<(usize, usize, Complex64)>> = vec![Vec::new(); nl];
        let mut upper_t: Vec<Vec<(usize, usize, Complex64)>> = vec![Vec::new(); nl];
        for (i, j, v) in m.iter() {
            let (li, lj) = (level_of[i], level_of[j]);
            if bordered && li == 0 {
                continue;
            }
            let e = (pos[i], pos[j], v);
            if li == lj {
                diag_t[li].push(e);
            } else if lj + 1 == li {
                lower_t[li].push(e);
            } else {
                debug_assert_eq!(li + 1, lj);
                upper_t[li].push(e);
            }
        }
        let upper: Vec<CscMatrix> = (0..nl)
            .map(|k| {
                let cols = levels.get(k + 1).map_or(0, Vec::len);
                CscMatrix::from_triplets(levels[k].len(), cols, std::mem::take(&mut upper_t[k]))
            })
            .collect();

        let mut t_levels: Vec<Vec<Complex64>> = levels
            .iter()
            .map(|lv| match border {
                Some(t) => lv.iter().map(|&v| t[v]).collect(),
                None => Vec::new(),
            })
            .collect();

        let dense_block = |k: usize, entries: &[(usize, usize, Complex64)]| {
            let w = levels[k].len();
            let mut s = DenseMatrix::zeros(w, w);
            for &(i, j, v) in entries {
                s[(i, j)] += v;
            }
            s
        };

        let mut lu: Vec<Option<Lu>> = (0..nl).map(|_| None).collect();
        let mut coupling: Vec<Option<Coupling>> = (0..nl).map(|_| None).collect();
        let mut min_pivot_ratio = f64::INFINITY;
        let mut s = Some(dense_block(nl - 1, &diag_t[nl - 1]));
        for k in (1..nl).rev() {
            let prev_w = levels[k - 1].len();
            let mut active = vec![false; prev_w];
            for &(_, j, _) in &lower_t[k] {
                active[j] = true;
            }
            let cols: Vec<usize> = (0..prev_w).filter(|&j| active[j]).collect();
            let mut local = vec![usize::MAX; prev_w];
            for (c, &j) in cols.iter().enumerate() {
                local[j] = c;
            }
            let mut g = DenseMatrix::zeros(levels[k].len(), cols.len());
            for &(i, j, v) in &lower_t[k] {
                g[(i, local[j])] += v;
            }

            let f = s.take().expect("diagonal block").lu()?;
            min_pivot_ratio = min_pivot_ratio.min(f.pivot_ratio());
            f.solve_in_place(&mut g);

            let reduced_border = if bordered {
                let tk = std::mem::take(&mut t_levels[k]);
                let (head, _) = t_levels.split_at_mut(k);
                let prev = &mut head[k - 1];
                for (c, &j) in cols.iter().enumerate() {
                    let dot: Complex64 = tk.iter().zip(g.col(c)).map(|(a, b)| a * b).sum();
                    prev[j] -= dot;
                }
                tk
            } else {
                Vec::new()
            };

            if k > 1 || !bordered {
                let mut next = dense_block(k - 1, &diag_t[k - 1]);
                let fup = &upper[k - 1];
                for (c, &j) in cols.iter().enumerate() {
                    let gcol = g.col(c);
                    let scol = next.col_mut(j);
                    for (q, &gq) in gcol.iter().enumerate() {
                        if gq == ZERO {
                            continue;
                        }
                        let (rows, vals) = fup.col(q);
                        for (&r, &v) in rows.iter().zip(vals) {
                            scol[r] -= v * gq;
                        }
                    }
                }
                s = Some(next);
            }
            lu[k] = Some(f);
            coupling[k] = Some(Coupling {
                cols,
                g,
                border: reduced_border,
            });
        }
        let tau = if bordered {
            t_levels[0][0]
        } else {
            let f = s.take().expect("root block").lu()?;
            min_pivot_ratio = min_pivot_ratio.min(f.pivot_ratio());
            lu[0] = Some(f);
            ZERO
        };
        if bordered && tau == ZERO {
            return Err(SingularPivot { index: root });
        }
        Ok(Self {
            levels,
            n,
            lu,
            coupling,
            upper,
            tau,
            bordered,
            min_pivot_ratio,
        })
    }

    pub(crate) fn min_pivot_ratio(&self) -> f64 {
        self.min_pivot_ratio
    }

    /// Solves with right-hand side `b` (the root entry of `b` is ignored when
    /// bordered) and border right-hand side `beta`.
    pub(crate) fn solve(&self, b: &[Complex64], beta: Complex64) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n);
        let nl = self.levels.len();
        let mut rhs: Vec<Vec<Complex64>> = self
            .levels
            .iter()
            .map(|lv| lv.iter().map(|&v| b[v]).collect())
            .collect();
        let mut beta = beta;
        let mut h: Vec<Vec<Complex64>> = vec![Vec::new(); nl];
        for k in (1..nl).rev() {
            let hk = self.lu[k].as_ref().unwrap().solve_vec(&rhs[k]);
            let cp = self.coupling[k].as_ref().unwrap();
            if self.bordered {
                beta -= cp.border.iter().zip(&hk).map(|(a, b)| a * b).sum::<Complex64>();
            }
            if k > 1 || !self.bordered {
                let upd = self.upper[k - 1].mul_vec(&hk);
                for (r, u) in rhs[k - 1].iter_mut().zip(upd) {
                    *r -= u;
                }
            }
            h[k] = hk;
        }
        let mut x_prev = if self.bordered {
            vec![beta / self.tau]
        } else {
            self.lu[0].as_ref().unwrap().solve_vec(&rhs[0])
        };
        let mut x = vec![ZERO; self.n];
        for (p, &v) in self.levels[0].iter().enumerate() {
            x[v] = x_prev[p];
        }
        for k in 1..nl {
            let cp = self.coupling[k].as_ref().unwrap();
            let mut xk = std::mem::take(&mut h[k]);
            for (c, &j) in cp.cols.iter().enumerate() {
                let xj = x_prev[j];
                if xj == ZERO {
                    continue;
                }
                for (xi, &gi) in xk.iter_mut().zip(cp.g.col(c)) {
                    *xi -= gi * xj;
                }
            }
            for (p, &v) in self.levels[k].iter().enumerate() {
                x[v] = xk[p];
            }
            x_prev = xk;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path_matrix(n: usize, rng: &mut ChaCha8Rng) -> CscMatrix {
        // banded pattern with a long-range chord to create wide levels
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, Complex64::new(4.0 + rng.random::<f64>(), rng.random::<f64>())));
            if i + 1 < n {
                t.push((i, i + 1, Complex64::new(rng.random::<f64>(), 0.3)));
                t.push((i + 1, i, Complex64::new(-0.7, rng.random::<f64>())));
            }
        }
        t.push((0, n - 1, Complex64::new(0.5, 0.5)));
        CscMatrix::from_triplets(n, n, t)
    }

    #[test]
    fn unbordered_solve_matches_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = path_matrix(40, &mut rng);
        let x: Vec<Complex64> = (0..40)
            .map(|_| Complex64::new(rng.random(), rng.random()))
            .collect();
        let b = m.mul_vec(&x);
        let f = LevelFactor::new(&m, 7, None).unwrap();
        let sol = f.solve(&b, ZERO);
        for (p, q) in sol.iter().zip(&x) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn bordered_solve_replaces_root_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 25;
        let m = path_matrix(n, &mut rng);
        let t: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + i as f64, 0.0)).collect();
        let root = 3;
        let x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random(), rng.random()))
            .collect();
        let mut b = m.mul_vec(&x);
        b[root] = ZERO;
        let beta: Complex64 = t.iter().zip(&x).map(|(a, b)| a * b).sum();
        let f = LevelFactor::new(&m, root, Some(&t)).unwrap();
        let sol = f.solve(&b, beta);
        for (p, q) in sol.iter().zip(&x) {
            assert!((p - q).norm() < 1e-11, "{p} vs {q}");
        }
    }

    #[test]
    fn levels_only_touch_neighbours() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = path_matrix(30, &mut rng);
        let levels = bfs_levels(&m, 11);
        let mut lvl = vec![0; 30];
        for (k, l) in levels.iter().enumerate() {
            for &v in l {
                lvl[v] = k as i64;
            }
        }
        for (i, j, _) in m.iter() {
            assert!((lvl[i] - lvl[j]).abs() <= 1);
        }
    }
}
