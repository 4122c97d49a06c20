use num_complex::Complex64;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::space::SpaceTag;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Dense column-major density matrix; the storage is exactly `vec(ρ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    tag: SpaceTag,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn from_vec(tag: SpaceTag, data: Vec<Complex64>) -> Result<Self> {
        let rho = Self::from_vec_unchecked(tag, data);
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_vec_unchecked(tag: SpaceTag, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), tag.dim() * tag.dim(), "vec(rho) length");
        Self { tag, data }
    }

    /// |ψ⟩⟨ψ| with ψ normalized first.
    pub fn pure(tag: SpaceTag, psi: &[Complex64]) -> Result<Self> {
        let d = tag.dim();
        if psi.len() != d {
            return Err(Error::InvalidState {
                detail: format!("state vector has length {}, space dim {d}", psi.len()),
            });
        }
        let norm = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState {
                detail: "state vector has zero norm".into(),
            });
        }
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for j in 0..d {
            for i in 0..d {
                data[i + j * d] = psi[i] * psi[j].conj() / (norm * norm);
            }
        }
        Ok(Self { tag, data })
    }

    pub fn basis_state(tag: SpaceTag, index: usize) -> Self {
        let d = tag.dim();
        assert!(index < d);
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        data[index + index * d] = Complex64::new(1.0, 0.0);
        Self { tag, data }
    }

    pub fn tag(&self) -> SpaceTag {
        self.tag
    }

    pub fn dim(&self) -> usize {
        self.tag.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i + j * self.dim()]
    }

    pub fn as_vec(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_col_major(self.dim(), self.dim(), self.data.clone())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue, computed block by block over the connected
    /// components of the nonzero pattern.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let mut uf = UnionFind::new(d);
        for j in 0..d {
            for i in 0..j {
                if self.get(i, j) != Complex64::new(0.0, 0.0)
                    || self.get(j, i) != Complex64::new(0.0, 0.0)
                {
                    uf.union(i, j);
                }
            }
        }
        let mut min = f64::INFINITY;
        for block in uf.groups() {
            let m = DenseMatrix::from_fn(block.len(), block.len(), |a, b| {
                self.get(block[a], block[b])
            });
            if let Some(&ev) = m.hermitian_eigenvalues().first() {
                min = min.min(ev);
            }
        }
        min
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState {
                detail: format!("not Hermitian: max |ρ - ρ†| = {herm:e}"),
            });
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > TRACE_TOL {
            return Err(Error::InvalidState {
                detail: format!("trace {tr} differs from 1"),
            });
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::PositivityViolation {
                min_eigenvalue: min,
            });
        }
        Ok(())
    }

    /// Replaces ρ by (ρ + ρ†)/2 and rescales to unit trace.
    pub(crate) fn hermitize_normalize(&mut self) {
        let d = self.dim();
        for j in 0..d {
            for i in 0..=j {
                let a = self.data[i + j * d];
                let b = self.data[j + i * d];
                let m = 0.5 * (a + b.conj());
                self.data[i + j * d] = m;
                self.data[j + i * d] = m.conj();
            }
        }
        let tr = self.trace().re;
        for v in &mut self.data {
            *v /= tr;
        }
    }
}

/// Disjoint-set forest with path halving and union by size.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }

    /// Groups ordered by smallest member; members ascending.
    pub(crate) fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            let r = self.find(x);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(x);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::EmitterBasis;

    fn tag(n: usize) -> SpaceTag {
        SpaceTag {
            n_max: 0,
            n_emitters: n,
            basis: EmitterBasis::Uncoupled,
        }
    }

    #[test]
    fn pure_state_is_valid() {
        let psi = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)];
        let rho = DensityMatrix::pure(tag(1), &psi).unwrap();
        rho.validate().unwrap();
        assert!((rho.get(1, 1).re - 0.8).abs() < 1e-15);
        assert!(rho.min_eigenvalue().abs() < 1e-14);
    }

    #[test]
    fn negative_population_rejected() {
        let c = |x| Complex64::new(x, 0.0);
        let data = vec![c(1.1), c(0.0), c(0.0), c(-0.1)];
        assert!(matches!(
            DensityMatrix::from_vec(tag(1), data),
            Err(Error::PositivityViolation { .. })
        ));
    }

    #[test]
    fn union_find_groups() {
        let mut uf = UnionFind::new(5);
        uf.union(3, 1);
        uf.union(4, 0);
        assert_eq!(uf.groups(), vec![vec![0, 4], vec![1, 3], vec![2]]);
    }
}
