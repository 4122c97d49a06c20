//! Lindblad generator of the driven-dissipative Tavis-Cummings model and its
//! solvers.
//!
//! Density matrices are column-stacked: `vec(ρ)[i + j·D] = ρ[i][j]`, and
//! `AρB ↦ (Bᵀ ⊗ A) vec(ρ)`.

mod blocks;
mod cutoff;
mod density;
mod evolve;
mod steady;

use num_complex::Complex64;

pub use cutoff::{
    converge_cutoff, converge_cutoff_with, CutoffObservable, CutoffOptions, CutoffResult,
    DEFAULT_CUTOFF_TOL,
};
pub use density::DensityMatrix;
pub use evolve::{evolve, EvolveOptions};
pub use steady::{steady_state, SteadyStateOptions};

pub(crate) use evolve::propagate;

use crate::error::Result;
use crate::operators::{
    cavity_op, emitter_op, CavityOp, EmitterOp, SparseOperator,
};
use crate::sparse::CscMatrix;
use crate::space::{check_rate, BasisState, CompositeSpace, SpaceTag, SystemParams};

/// Sparse D²×D² generator acting on vectorized density matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    tag: SpaceTag,
    matrix: CscMatrix,
}

impl Superoperator {
    pub fn zero(tag: SpaceTag) -> Self {
        let n = tag.dim() * tag.dim();
        Self {
            tag,
            matrix: CscMatrix::zeros(n, n),
        }
    }

    /// # Panics
    /// If the matrix is not D²×D² for the tag.
    pub fn from_matrix(tag: SpaceTag, matrix: CscMatrix) -> Self {
        let n = tag.dim() * tag.dim();
        assert_eq!((matrix.nrows(), matrix.ncols()), (n, n));
        Self { tag, matrix }
    }

    pub fn tag(&self) -> SpaceTag {
        self.tag
    }

    /// Hilbert-space dimension D.
    pub fn hilbert_dim(&self) -> usize {
        self.tag.dim()
    }

    pub fn matrix(&self) -> &CscMatrix {
        &self.matrix
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.tag.ensure_eq(&other.tag)?;
        Ok(Self {
            tag: self.tag,
            matrix: self.matrix.add(&other.matrix),
        })
    }

    /// `L[ρ]` as a column-stacked vector.
    pub fn apply_vec(&self, vec_rho: &[Complex64]) -> Vec<Complex64> {
        self.matrix.mul_vec(vec_rho)
    }

    /// ‖vec(1)† L‖_∞ / ‖L‖_∞; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let d = self.tag.dim();
        let mut t = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            t[i + i * d] = Complex64::new(1.0, 0.0);
        }
        let row = self.matrix.tr_mul_vec(&t);
        let defect = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let scale = self.matrix.norm_inf();
        if scale == 0.0 {
            defect
        } else {
            defect / scale
        }
    }
}

/// H = i g (a J₊ − J₋ a†) in the frame rotating at the common frequency.
pub fn build_hamiltonian(space: &CompositeSpace, params: &SystemParams) -> Result<SparseOperator> {
    params.validate()?;
    let g = params.coupling_g;
    let d = space.dim();
    let n = space.n_emitters();
    let mut t = Vec::new();
    for col in 0..d {
        let s = space.decode(col);
        let ph = s.photons;
        for i in 0..n {
            let bit = 1u64 << i;
            if !s.is_excited(i) && ph > 0 {
                // a σ₊ⁱ
                let row = space.index(BasisState {
                    photons: ph - 1,
                    pattern: s.pattern | bit,
                });
                t.push((row, col, Complex64::new(0.0, g * (ph as f64).sqrt())));
            }
            if s.is_excited(i) && ph < space.n_max() {
                // −σ₋ⁱ a†
                let row = space.index(BasisState {
                    photons: ph + 1,
                    pattern: s.pattern & !bit,
                });
                t.push((row, col, Complex64::new(0.0, -g * ((ph + 1) as f64).sqrt())));
            }
        }
    }
    SparseOperator::new_hermitian(space.tag(), CscMatrix::from_triplets(d, d, t))
}

/// −i[H, ·].
pub fn hamiltonian_superoperator(h: &SparseOperator) -> Superoperator {
    let d = h.dim();
    let id = CscMatrix::identity(d);
    let left = id.kron(h.matrix());
    let right = h.matrix().transpose().kron(&id);
    let minus_i = Complex64::new(0.0, -1.0);
    Superoperator {
        tag: h.tag(),
        matrix: left.lincomb(minus_i, &right, -minus_i),
    }
}

/// D[C; r]ρ = (r/2)(2CρC† − C†Cρ − ρC†C).
pub fn dissipator(c: &SparseOperator, rate: f64) -> Result<Superoperator> {
    check_rate("rate", rate)?;
    let tag = c.tag();
    if rate == 0.0 {
        return Ok(Superoperator::zero(tag));
    }
    let d = c.dim();
    let id = CscMatrix::identity(d);
    let cm = c.matrix();
    let cdc = cm.adjoint().matmul(cm);
    let jump = cm.conj().kron(cm);
    let anti = id.kron(&cdc).add(&cdc.transpose().kron(&id));
    let half = Complex64::new(0.5 * rate, 0.0);
    Ok(Superoperator {
        tag,
        matrix: jump.lincomb(Complex64::new(rate, 0.0), &anti, -half),
    })
}

/// −i[H,·] + Σ D[C_k; r_k].
pub fn lindblad(
    h: &SparseOperator,
    channels: &[(SparseOperator, f64)],
) -> Result<Superoperator> {
    let mut l = hamiltonian_superoperator(h);
    for (c, rate) in channels {
        l = l.plus(&dissipator(c, *rate)?)?;
    }
    Ok(l)
}

/// Collapse operators with their rates: a (κ), then per emitter σ₋ (γ),
/// σ₊ (P_x), σ_z (γ*/2). Zero-rate channels are omitted.
pub fn jump_channels(
    space: &CompositeSpace,
    params: &SystemParams,
) -> Result<Vec<(String, SparseOperator, f64)>> {
    params.validate()?;
    let mut out = Vec::new();
    if params.kappa > 0.0 {
        out.push((
            "cavity".to_string(),
            cavity_op(space, CavityOp::Annihilate),
            params.kappa,
        ));
    }
    for i in 0..space.n_emitters() {
        for (name, kind, rate) in [
            ("decay", EmitterOp::Lower, params.gamma),
            ("pump", EmitterOp::Raise, params.pump_px),
            ("dephase", EmitterOp::Z, 0.5 * params.dephasing),
        ] {
            if rate > 0.0 {
                out.push((format!("{name}_{i}"), emitter_op(space, i, kind)?, rate));
            }
        }
    }
    Ok(out)
}

pub fn build_liouvillian(space: &CompositeSpace, params: &SystemParams) -> Result<Superoperator> {
    let h = build_hamiltonian(space, params)?;
    let channels: Vec<(SparseOperator, f64)> = jump_channels(space, params)?
        .into_iter()
        .map(|(_, c, r)| (c, r))
        .collect();
    lindblad(&h, &channels)
}
