//! Cavity, single-emitter and collective operators on a [`CompositeSpace`].
//!
//! Matrices are assembled directly from the index map rather than from
//! Kronecker products, so composition identities in the tests are genuine
//! cross-checks.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::CscMatrix;
use crate::space::{BasisState, CompositeSpace, SpaceTag};

const HERMITIAN_TOL: f64 = 1e-14;

/// A sparse matrix bound to the space it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    tag: SpaceTag,
    matrix: CscMatrix,
    hermitian: bool,
}

impl SparseOperator {
    /// # Panics
    /// If the matrix shape does not match the tag's dimension.
    pub fn new(tag: SpaceTag, matrix: CscMatrix) -> Self {
        assert_eq!(matrix.nrows(), tag.dim(), "operator rows vs space dim");
        assert_eq!(matrix.ncols(), tag.dim(), "operator cols vs space dim");
        Self {
            tag,
            matrix,
            hermitian: false,
        }
    }

    /// Builds an operator flagged Hermitian; fails if it is not within 1e-14.
    pub fn new_hermitian(tag: SpaceTag, matrix: CscMatrix) -> Result<Self> {
        let mut op = Self::new(tag, matrix);
        if !op.matrix.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::InvalidParameter {
                key: "operator",
                reason: "flagged Hermitian but A != A†".into(),
            });
        }
        op.hermitian = true;
        Ok(op)
    }

    pub fn identity(tag: SpaceTag) -> Self {
        Self {
            tag,
            matrix: CscMatrix::identity(tag.dim()),
            hermitian: true,
        }
    }

    pub fn zero(tag: SpaceTag) -> Self {
        Self {
            tag,
            matrix: CscMatrix::zeros(tag.dim(), tag.dim()),
            hermitian: true,
        }
    }

    pub fn tag(&self) -> SpaceTag {
        self.tag
    }

    pub fn dim(&self) -> usize {
        self.tag.dim()
    }

    pub fn matrix(&self) -> &CscMatrix {
        &self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> Self {
        Self {
            tag: self.tag,
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    /// `self * rhs`.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        self.tag.ensure_eq(&rhs.tag)?;
        Ok(Self::new(self.tag, self.matrix.matmul(&rhs.matrix)))
    }

    pub fn plus(&self, rhs: &Self) -> Result<Self> {
        self.tag.ensure_eq(&rhs.tag)?;
        Ok(Self {
            tag: self.tag,
            matrix: self.matrix.add(&rhs.matrix),
            hermitian: self.hermitian && rhs.hermitian,
        })
    }

    pub fn minus(&self, rhs: &Self) -> Result<Self> {
        self.tag.ensure_eq(&rhs.tag)?;
        Ok(Self {
            tag: self.tag,
            matrix: self.matrix.sub(&rhs.matrix),
            hermitian: self.hermitian && rhs.hermitian,
        })
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            tag: self.tag,
            matrix: self.matrix.scale(c),
            hermitian: self.hermitian && c.im == 0.0,
        }
    }

    /// `[self, rhs]`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        self.compose(rhs)?.minus(&rhs.compose(self)?)
    }

    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        self.matrix.mul_vec(psi)
    }

    /// Largest entrywise difference; errors on mismatched spaces.
    pub fn max_abs_diff(&self, rhs: &Self) -> Result<f64> {
        self.tag.ensure_eq(&rhs.tag)?;
        Ok(self.matrix.max_abs_diff(&rhs.matrix))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CavityOp {
    Annihilate,
    Create,
    Number,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmitterOp {
    Lower,
    Raise,
    Z,
    /// σ₊σ₋, the excited-state projector.
    Population,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollectiveOp {
    JMinus,
    JPlus,
    JpJm,
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn cavity_op(space: &CompositeSpace, kind: CavityOp) -> SparseOperator {
    let d = space.dim();
    let mut t = Vec::new();
    for col in 0..d {
        let s = space.decode(col);
        let n = s.photons;
        match kind {
            CavityOp::Annihilate if n > 0 => {
                let row = space.index(BasisState {
                    photons: n - 1,
                    ..s
                });
                t.push((row, col, re((n as f64).sqrt())));
            }
            CavityOp::Create if n < space.n_max() => {
                let row = space.index(BasisState {
                    photons: n + 1,
                    ..s
                });
                t.push((row, col, re(((n + 1) as f64).sqrt())));
            }
            CavityOp::Number if n > 0 => t.push((col, col, re(n as f64))),
            _ => {}
        }
    }
    let hermitian = kind == CavityOp::Number;
    SparseOperator {
        tag: space.tag(),
        matrix: CscMatrix::from_triplets(d, d, t),
        hermitian,
    }
}

pub fn emitter_op(space: &CompositeSpace, i: usize, kind: EmitterOp) -> Result<SparseOperator> {
    if i >= space.n_emitters() {
        return Err(Error::EmitterIndex {
            index: i,
            n_emitters: space.n_emitters(),
        });
    }
    let d = space.dim();
    let bit = 1u64 << i;
    let mut t = Vec::new();
    for col in 0..d {
        let s = space.decode(col);
        let up = s.is_excited(i);
        let flipped = || {
            space.index(BasisState {
                pattern: s.pattern ^ bit,
                ..s
            })
        };
        match kind {
            EmitterOp::Lower if up => t.push((flipped(), col, re(1.0))),
            EmitterOp::Raise if !up => t.push((flipped(), col, re(1.0))),
            EmitterOp::Z => t.push((col, col, re(if up { 1.0 } else { -1.0 }))),
            EmitterOp::Population if up => t.push((col, col, re(1.0))),
            _ => {}
        }
    }
    let hermitian = matches!(kind, EmitterOp::Z | EmitterOp::Population);
    Ok(SparseOperator {
        tag: space.tag(),
        matrix: CscMatrix::from_triplets(d, d, t),
        hermitian,
    })
}

pub fn collective_op(space: &CompositeSpace, kind: CollectiveOp) -> SparseOperator {
    let d = space.dim();
    let n = space.n_emitters();
    let mut t = Vec::new();
    for col in 0..d {
        let s = space.decode(col);
        let with = |pattern| space.index(BasisState { pattern, ..s });
        match kind {
            CollectiveOp::JMinus => {
                for i in (0..n).filter(|&i| s.is_excited(i)) {
                    t.push((with(s.pattern ^ 1 << i), col, re(1.0)));
                }
            }
            CollectiveOp::JPlus => {
                for i in (0..n).filter(|&i| !s.is_excited(i)) {
                    t.push((with(s.pattern ^ 1 << i), col, re(1.0)));
                }
            }
            CollectiveOp::JpJm => {
                // Σᵢ σ₊ⁱσ₋ⁱ on the diagonal, hopping σ₊ʲσ₋ⁱ (i ≠ j) off it
                let excited = s.pattern.count_ones();
                if excited > 0 {
                    t.push((col, col, re(excited as f64)));
                }
                for i in (0..n).filter(|&i| s.is_excited(i)) {
                    for j in (0..n).filter(|&j| !s.is_excited(j)) {
                        t.push((with(s.pattern ^ 1 << i ^ 1 << j), col, re(1.0)));
                    }
                }
            }
        }
    }
    SparseOperator {
        tag: space.tag(),
        matrix: CscMatrix::from_triplets(d, d, t),
        hermitian: kind == CollectiveOp::JpJm,
    }
}

/// J_z = ½ Σᵢ σ_zⁱ.
pub fn collective_jz(space: &CompositeSpace) -> SparseOperator {
    let d = space.dim();
    let n = space.n_emitters() as f64;
    let diag: Vec<Complex64> = (0..d)
        .map(|k| re(space.decode(k).pattern.count_ones() as f64 - 0.5 * n))
        .collect();
    SparseOperator {
        tag: space.tag(),
        matrix: CscMatrix::from_diagonal(&diag),
        hermitian: true,
    }
}
