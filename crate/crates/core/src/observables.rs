//! Expectation values, populations and photon correlations.

use num_complex::Complex64;

use crate::collective::to_uncoupled;
use crate::error::{Error, Result};
use crate::liouville::{propagate, DensityMatrix, EvolveOptions, Superoperator};
use crate::operators::{
    cavity_op, collective_op, emitter_op, CavityOp, CollectiveOp, EmitterOp, SparseOperator,
};
use crate::space::CompositeSpace;

/// Correlations with an intensity at or below this are undefined.
pub const INTENSITY_FLOOR: f64 = 1e-12;

const SITE_SYMMETRY_TOL: f64 = 1e-8;

/// Tr(O ρ).
pub fn expectation(rho: &DensityMatrix, op: &SparseOperator) -> Result<Complex64> {
    rho.tag().ensure_eq(&op.tag())?;
    Ok(trace_product(op, rho.as_vec(), rho.dim()))
}

/// Tr(O X) for a column-stacked operator X.
pub(crate) fn trace_product(op: &SparseOperator, x: &[Complex64], d: usize) -> Complex64 {
    op.matrix().iter().map(|(i, j, v)| v * x[j + i * d]).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopulationSet {
    /// ⟨a†a⟩.
    pub n_a: f64,
    /// ⟨J₊J₋⟩.
    pub n_j: f64,
    /// N times the site-averaged excited population.
    pub total_nx: f64,
}

/// Accepts coupled-basis states of the emitters-only space as well.
pub fn populations(rho: &DensityMatrix, space: &CompositeSpace) -> Result<PopulationSet> {
    let rho = to_uncoupled(rho)?;
    rho.tag().ensure_eq(&space.tag())?;
    let n_a = expectation(&rho, &cavity_op(space, CavityOp::Number))?.re;
    let n_j = expectation(&rho, &collective_op(space, CollectiveOp::JpJm))?.re;
    let mut site = Vec::with_capacity(space.n_emitters());
    for i in 0..space.n_emitters() {
        site.push(expectation(&rho, &emitter_op(space, i, EmitterOp::Population)?)?.re);
    }
    let lo = site.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = site.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > SITE_SYMMETRY_TOL {
        return Err(Error::SiteAsymmetry { spread: hi - lo });
    }
    Ok(PopulationSet {
        n_a,
        n_j,
        total_nx: site.iter().sum(),
    })
}

/// ⟨A†A†AA⟩ / ⟨A†A⟩² for an arbitrary lowering-type operator A.
pub fn g2_zero(rho: &DensityMatrix, a: &SparseOperator) -> Result<f64> {
    let ad = a.adjoint();
    let num = ad.compose(a)?;
    let pair = ad.compose(&num)?.compose(a)?;
    let intensity = expectation(rho, &num)?.re;
    if intensity <= INTENSITY_FLOOR {
        return Err(Error::ZeroIntensity { intensity });
    }
    Ok(expectation(rho, &pair)?.re / (intensity * intensity))
}

pub fn g2_zero_cavity(rho: &DensityMatrix, space: &CompositeSpace) -> Result<f64> {
    rho.tag().ensure_eq(&space.tag())?;
    g2_zero(rho, &cavity_op(space, CavityOp::Annihilate))
}

/// ⟨J₊J₊J₋J₋⟩ / ⟨J₊J₋⟩². Coupled-basis states are mapped back first.
pub fn g2_zero_collective(rho: &DensityMatrix) -> Result<f64> {
    let rho = to_uncoupled(rho)?;
    let space = crate::space::build_space(rho.tag().n_emitters, rho.tag().n_max)?;
    g2_zero(&rho, &collective_op(&space, CollectiveOp::JMinus))
}

/// g²(τ) by quantum regression: propagate χ = AρA† under `l` and return
/// Tr(A†A χ(τ)) / ⟨A†A⟩² on the grid.
pub fn g2_tau(
    l: &Superoperator,
    rho_ss: &DensityMatrix,
    a: &SparseOperator,
    tau_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<f64>> {
    l.tag().ensure_eq(&rho_ss.tag())?;
    l.tag().ensure_eq(&a.tag())?;
    let num = a.adjoint().compose(a)?;
    let intensity = expectation(rho_ss, &num)?.re;
    if intensity <= INTENSITY_FLOOR {
        return Err(Error::ZeroIntensity { intensity });
    }
    let d = rho_ss.dim();
    let chi = sandwich(a, rho_ss.as_vec(), d);
    let series = propagate(l, &chi, tau_grid, opts)?;
    Ok(series
        .iter()
        .map(|x| trace_product(&num, x, d).re / (intensity * intensity))
        .collect())
}

/// vec(A X A†) for column-stacked X.
pub(crate) fn sandwich(a: &SparseOperator, x: &[Complex64], d: usize) -> Vec<Complex64> {
    let m = a.matrix();
    // Y = A X, column by column
    let mut y = vec![Complex64::new(0.0, 0.0); d * d];
    for j in 0..d {
        m.mul_vec_acc(&x[j * d..(j + 1) * d], &mut y[j * d..(j + 1) * d]);
    }
    // Z = Y A†: Z[:, j] = Σ_k Y[:, k] conj(A[j, k])
    let mut z = vec![Complex64::new(0.0, 0.0); d * d];
    for (j, k, v) in m.iter() {
        let c = v.conj();
        for i in 0..d {
            z[i + j * d] += y[i + k * d] * c;
        }
    }
    z
}
