//! Total-angular-momentum basis |J, M; i⟩ of N two-level emitters.
//!
//! Built by coupling one emitter at a time (emitter 0 first, emitter N−1
//! last) with Condon–Shortley Clebsch–Gordan coefficients. Multiplets are
//! ordered by J descending; copies of the same J keep the order of their
//! parents, so the copy descending from the larger intermediate J comes
//! first. Within a multiplet M runs from +J down to −J.

use std::fmt;

use num_complex::Complex64;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::liouville::DensityMatrix;
use crate::operators::SparseOperator;
use crate::sparse::CscMatrix;
use crate::space::{EmitterBasis, SpaceTag};

pub const MAX_COUPLED_EMITTERS: usize = 12;

/// A half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const fn from_twice(twice: i64) -> Self {
        Self(twice)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CoupledState {
    pub j: HalfInt,
    pub m: HalfInt,
    /// 1-based label of the permutation copy, `1..=degeneracy(N, J)`.
    pub copy: usize,
}

fn binomial(n: u64, k: i64) -> u128 {
    if k < 0 || k as u64 > n {
        return 0;
    }
    let k = (k as u64).min(n - k as u64);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of copies of spin J among N spin-½ particles,
/// C(N, N/2−J) − C(N, N/2−J−1).
pub fn degeneracy(n: usize, j: HalfInt) -> Result<u64> {
    let tj = j.twice();
    if tj < 0 || tj > n as i64 || (n as i64 - tj) % 2 != 0 {
        return Err(Error::InadmissibleJ { n, twice_j: tj });
    }
    let k = (n as i64 - tj) / 2;
    Ok((binomial(n as u64, k) - binomial(n as u64, k - 1)) as u64)
}

/// Admissible J values for N emitters, descending.
pub fn admissible_j(n: usize) -> Vec<HalfInt> {
    (0..=n as i64)
        .rev()
        .filter(|tj| (n as i64 - tj) % 2 == 0)
        .map(HalfInt::from_twice)
        .collect()
}

#[derive(Clone, Debug)]
pub struct CoupledBasis {
    n: usize,
    states: Vec<CoupledState>,
    /// Columns are coupled states in uncoupled components (real).
    u: DenseMatrix,
}

struct Multiplet {
    twice_j: i64,
    /// `vecs[k]` has M = J − k.
    vecs: Vec<Vec<f64>>,
}

pub fn coupled_basis(n: usize) -> Result<CoupledBasis> {
    if n == 0 || n > MAX_COUPLED_EMITTERS {
        return Err(Error::BasisTooLarge {
            n,
            cap: MAX_COUPLED_EMITTERS,
        });
    }
    let mut mults = vec![Multiplet {
        twice_j: 1,
        vecs: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
    }];
    for k in 1..n {
        let old_dim = 1usize << k;
        let mut next = Vec::new();
        for p in &mults {
            let jp = p.twice_j;
            let parent = |tm: i64| -> Option<&Vec<f64>> {
                (tm.abs() <= jp).then(|| &p.vecs[((jp - tm) / 2) as usize])
            };
            let mut children = vec![jp + 1];
            if jp >= 1 {
                children.push(jp - 1);
            }
            for tj in children {
                let mut vecs = Vec::with_capacity(tj as usize + 1);
                for step in 0..=tj {
                    let tm = tj - 2 * step;
                    let denom = 2.0 * (jp + 1) as f64;
                    let plus = ((jp + tm + 1) as f64 / denom).sqrt();
                    let minus = ((jp - tm + 1) as f64 / denom).sqrt();
                    let (up, down) = if tj > jp { (plus, minus) } else { (-minus, plus) };
                    let mut v = vec![0.0; 2 * old_dim];
                    if let Some(src) = parent(tm - 1) {
                        for (i, &x) in src.iter().enumerate() {
                            v[i + old_dim] += up * x;
                        }
                    }
                    if let Some(src) = parent(tm + 1) {
                        for (i, &x) in src.iter().enumerate() {
                            v[i] += down * x;
                        }
                    }
                    vecs.push(v);
                }
                next.push(Multiplet { twice_j: tj, vecs });
            }
        }
        next.sort_by_key(|m| -m.twice_j);
        mults = next;
    }

    let dim = 1usize << n;
    let mut states = Vec::with_capacity(dim);
    let mut u = DenseMatrix::zeros(dim, dim);
    let mut col = 0;
    let mut copy = 0;
    let mut last_j = i64::MIN;
    for m in &mults {
        copy = if m.twice_j == last_j { copy + 1 } else { 1 };
        last_j = m.twice_j;
        for (step, v) in m.vecs.iter().enumerate() {
            states.push(CoupledState {
                j: HalfInt::from_twice(m.twice_j),
                m: HalfInt::from_twice(m.twice_j - 2 * step as i64),
                copy,
            });
            for (i, &x) in v.iter().enumerate() {
                u[(i, col)] = Complex64::new(x, 0.0);
            }
            col += 1;
        }
    }
    Ok(CoupledBasis { n, states, u })
}

/// Coupled-basis tag of the emitters-only space.
pub fn coupled_tag(n: usize) -> SpaceTag {
    SpaceTag {
        n_max: 0,
        n_emitters: n,
        basis: EmitterBasis::Coupled,
    }
}

fn uncoupled_tag(n: usize) -> SpaceTag {
    SpaceTag {
        basis: EmitterBasis::Uncoupled,
        ..coupled_tag(n)
    }
}

impl CoupledBasis {
    pub fn n_emitters(&self) -> usize {
        self.n
    }

    pub fn states(&self) -> &[CoupledState] {
        &self.states
    }

    /// Column-unitary matrix whose columns are the coupled states.
    pub fn transform(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn index_of(&self, j: HalfInt, m: HalfInt, copy: usize) -> Option<usize> {
        self.states
            .iter()
            .position(|s| s.j == j && s.m == m && s.copy == copy)
    }

    /// U† O U, re-tagged to the coupled basis.
    pub fn operator_to_coupled(&self, op: &SparseOperator) -> Result<SparseOperator> {
        op.tag().ensure_eq(&uncoupled_tag(self.n))?;
        let ou = sparse_times_dense(op.matrix(), &self.u);
        let m = self.u.adjoint().matmul(&ou);
        let out = CscMatrix::from_dense(&m, 1e-14 * m.max_abs().max(1.0));
        Ok(SparseOperator::new(coupled_tag(self.n), out))
    }

    pub fn state_to_uncoupled(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        rho.tag().ensure_eq(&coupled_tag(self.n))?;
        let m = self.u.matmul(&rho.to_dense()).matmul(&self.u.adjoint());
        Ok(DensityMatrix::from_vec_unchecked(uncoupled_tag(self.n), m.into_vec()))
    }

    pub fn state_to_coupled(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        rho.tag().ensure_eq(&uncoupled_tag(self.n))?;
        let m = self.u.adjoint().matmul(&rho.to_dense()).matmul(&self.u);
        Ok(DensityMatrix::from_vec_unchecked(coupled_tag(self.n), m.into_vec()))
    }
}

fn sparse_times_dense(a: &CscMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(a.nrows(), b.ncols());
    for c in 0..b.ncols() {
        a.mul_vec_acc(b.col(c), out.col_mut(c));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(t: i64) -> HalfInt {
        HalfInt::from_twice(t)
    }

    #[test]
    fn degeneracies() {
        assert_eq!(degeneracy(2, h(2)).unwrap(), 1);
        assert_eq!(degeneracy(2, h(0)).unwrap(), 1);
        assert_eq!(degeneracy(3, h(1)).unwrap(), 2);
        assert!(degeneracy(3, h(2)).is_err());
        assert!(degeneracy(3, h(5)).is_err());
        for n in 1..=10 {
            let total: u64 = admissible_j(n)
                .into_iter()
                .map(|j| (j.twice() as u64 + 1) * degeneracy(n, j).unwrap())
                .sum();
            assert_eq!(total, 1 << n);
        }
    }

    #[test]
    fn two_emitter_singlet() {
        let b = coupled_basis(2).unwrap();
        let k = b.index_of(h(0), h(0), 1).unwrap();
        assert_eq!(k, 3);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // |e,g⟩ has emitter 0 excited: index 1
        let col: Vec<f64> = (0..4).map(|i| b.transform()[(i, k)].re).collect();
        let expected = [0.0, s, -s, 0.0];
        for (a, e) in col.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
    }

    #[test]
    fn ordering_for_three() {
        let b = coupled_basis(3).unwrap();
        let labels: Vec<(i64, i64, usize)> = b
            .states()
            .iter()
            .map(|s| (s.j.twice(), s.m.twice(), s.copy))
            .collect();
        assert_eq!(
            labels,
            vec![
                (3, 3, 1),
                (3, 1, 1),
                (3, -1, 1),
                (3, -3, 1),
                (1, 1, 1),
                (1, -1, 1),
                (1, 1, 2),
                (1, -1, 2)
            ]
        );
        assert_eq!(h(-1).to_string(), "-1/2");
        assert_eq!(h(4).to_string(), "2");
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            coupled_basis(13),
            Err(Error::BasisTooLarge { .. })
        ));
    }
}
