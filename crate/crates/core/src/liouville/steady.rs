use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::blocks::{components, LevelFactor};
use super::density::{DensityMatrix, POSITIVITY_TOL};
use super::Superoperator;
use crate::error::{Error, Result};
use crate::sparse::CscMatrix;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyStateOptions {
    /// Relative residual bound ‖L ρ‖ ≤ tol · ‖L‖ · ‖ρ‖ (∞-norms).
    pub tol: f64,
    pub max_refinements: usize,
    /// Iteration budget for the shifted inverse-iteration fallback.
    pub max_inverse_iterations: usize,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_refinements: 4,
            max_inverse_iterations: 50,
        }
    }
}

fn norm_inf(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Unique stationary state of `l`.
///
/// The generator is split into its connected sectors; exactly one of them
/// may carry population (diagonal) entries, otherwise the steady state is not
/// unique. That sector is solved directly with the trace condition replacing
/// the root equation; shifted inverse iteration is the fallback.
pub fn steady_state(l: &Superoperator, opts: &SteadyStateOptions) -> Result<DensityMatrix> {
    let d = l.hilbert_dim();
    let mut is_pop = vec![false; d * d];
    for i in 0..d {
        is_pop[i + i * d] = true;
    }
    let sectors: Vec<Vec<usize>> = components(l.matrix())
        .into_iter()
        .filter(|c| c.iter().any(|&k| is_pop[k]))
        .collect();
    if sectors.len() != 1 {
        return Err(Error::NonUniqueSteadyState {
            detail: format!(
                "{} disconnected sectors carry population, each has its own stationary state",
                sectors.len()
            ),
        });
    }
    let idx = &sectors[0];
    let m = l.matrix().principal_submatrix(idx);
    let t: Vec<Complex64> = idx.iter().map(|&k| if is_pop[k] { ONE } else { ZERO }).collect();
    let m_norm = m.norm_inf();

    let x = match bordered_solve(&m, &t, m_norm, opts) {
        Some(x) => x,
        None => {
            log::debug!("bordered solve failed on a sector of size {}; inverse iteration", idx.len());
            inverse_iteration(&m, &t, m_norm, opts)?
        }
    };

    let mut full = vec![ZERO; d * d];
    for (&k, &v) in idx.iter().zip(&x) {
        full[k] = v;
    }
    let mut rho = DensityMatrix::from_vec_unchecked(l.tag(), full);
    rho.hermitize_normalize();

    let res = norm_inf(&l.apply_vec(rho.as_vec()));
    let bound = opts.tol * l.matrix().norm_inf() * norm_inf(rho.as_vec());
    if res > bound {
        return Err(Error::NoConvergence {
            detail: format!("steady-state residual {res:e} exceeds {bound:e}"),
        });
    }
    let min = rho.min_eigenvalue();
    if min < -POSITIVITY_TOL {
        return Err(Error::PositivityViolation {
            min_eigenvalue: min,
        });
    }
    Ok(rho)
}

fn residual_ok(m: &CscMatrix, x: &[Complex64], m_norm: f64, tol: f64) -> bool {
    let r = norm_inf(&m.mul_vec(x));
    r <= tol * m_norm * norm_inf(x)
}

/// Direct solve with the trace row replacing the equation of the population
/// entry with the smallest diagonal magnitude.
fn bordered_solve(
    m: &CscMatrix,
    t: &[Complex64],
    m_norm: f64,
    opts: &SteadyStateOptions,
) -> Option<Vec<Complex64>> {
    let n = m.ncols();
    if n == 1 {
        return Some(vec![ONE]);
    }
    let diag = m.diagonal();
    let root = (0..n)
        .filter(|&k| t[k] != ZERO)
        .min_by(|&a, &b| diag[a].norm().total_cmp(&diag[b].norm()))?;
    let factor = LevelFactor::new(m, root, Some(t)).ok()?;
    log::debug!(
        "steady state: {n} unknowns, smallest pivot ratio {:.3e}",
        factor.min_pivot_ratio()
    );
    let zeros = vec![ZERO; n];
    let mut x = factor.solve(&zeros, ONE);
    // target somewhat below tol so hermitization keeps us inside it
    let target = 0.1 * opts.tol;
    for _ in 0..opts.max_refinements {
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        if residual_ok(m, &x, m_norm, target) {
            return Some(x);
        }
        let mut r: Vec<Complex64> = m.mul_vec(&x).into_iter().map(|v| -v).collect();
        r[root] = ZERO;
        let beta = ONE - t.iter().zip(&x).map(|(a, b)| a * b).sum::<Complex64>();
        let dx = factor.solve(&r, beta);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
    }
    residual_ok(m, &x, m_norm, opts.tol).then_some(x)
}

/// Inverse iteration on M − σ from two starts; distinct limits mean the
/// null space is not one-dimensional.
fn inverse_iteration(
    m: &CscMatrix,
    t: &[Complex64],
    m_norm: f64,
    opts: &SteadyStateOptions,
) -> Result<Vec<Complex64>> {
    let n = m.ncols();
    let sigma = 1e-9 * m_norm.max(f64::MIN_POSITIVE);
    let shifted = m.sub(&CscMatrix::identity(n).scale(Complex64::new(sigma, 0.0)));
    let diag = shifted.diagonal();
    let root = (0..n)
        .max_by(|&a, &b| diag[a].norm().total_cmp(&diag[b].norm()))
        .unwrap_or(0);
    let factor = LevelFactor::new(&shifted, root, None).map_err(|e| Error::NoConvergence {
        detail: format!("shifted factorization hit a zero pivot at {}", e.index),
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let random: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let mut limits = Vec::new();
    for start in [t.to_vec(), random] {
        let mut x = start;
        let mut converged = false;
        for _ in 0..opts.max_inverse_iterations {
            let y = factor.solve(&x, ZERO);
            let s = norm_inf(&y);
            if !s.is_finite() || s == 0.0 {
                break;
            }
            x = y.into_iter().map(|v| v / s).collect();
            if residual_ok(m, &x, m_norm, opts.tol) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                detail: "inverse iteration stalled".into(),
            });
        }
        let tr: Complex64 = t.iter().zip(&x).map(|(a, b)| a * b).sum();
        if tr.norm() < 1e-8 * norm_inf(&x) * (n as f64).sqrt() {
            return Err(Error::NonUniqueSteadyState {
                detail: "traceless null vector found".into(),
            });
        }
        limits.push(x.into_iter().map(|v| v / tr).collect::<Vec<_>>());
    }
    let diff = limits[0]
        .iter()
        .zip(&limits[1])
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if diff > 1e-6 * norm_inf(&limits[0]) {
        return Err(Error::NonUniqueSteadyState {
            detail: format!("two starting vectors converged to states differing by {diff:e}"),
        });
    }
    Ok(limits.swap_remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{build_liouvillian, lindblad};
    use crate::operators::{emitter_op, EmitterOp, SparseOperator};
    use crate::space::{build_space, SystemParams};

    #[test]
    fn dark_state_without_pump() {
        let s = build_space(2, 2).unwrap();
        let p = SystemParams::new(2).with_kappa(2.0).with_gamma(0.5);
        let l = build_liouvillian(&s, &p).unwrap();
        let rho = steady_state(&l, &SteadyStateOptions::default()).unwrap();
        assert!((rho.get(0, 0).re - 1.0).abs() < 1e-12);
        let rest: f64 = rho.as_vec().iter().skip(1).map(|v| v.norm()).sum();
        assert!(rest < 1e-12);
    }

    #[test]
    fn two_level_rate_equation() {
        // single emitter with decay and pump: n_x = P / (P + γ)
        let s = build_space(1, 0).unwrap();
        let (gamma, pump) = (0.3, 0.11);
        let lo = emitter_op(&s, 0, EmitterOp::Lower).unwrap();
        let hi = emitter_op(&s, 0, EmitterOp::Raise).unwrap();
        let l = lindblad(&SparseOperator::zero(s.tag()), &[(lo, gamma), (hi, pump)]).unwrap();
        let rho = steady_state(&l, &SteadyStateOptions::default()).unwrap();
        assert!((rho.get(1, 1).re - pump / (pump + gamma)).abs() < 1e-14);
    }

    #[test]
    fn pure_commutator_is_not_unique() {
        let s = build_space(1, 1).unwrap();
        let l = build_liouvillian(&s, &SystemParams::new(1)).unwrap();
        assert!(matches!(
            steady_state(&l, &SteadyStateOptions::default()),
            Err(Error::NonUniqueSteadyState { .. })
        ));
    }

    #[test]
    fn inverse_iteration_agrees_with_direct() {
        let s = build_space(1, 3).unwrap();
        let p = SystemParams::new(1)
            .with_kappa(0.7)
            .with_gamma(0.1)
            .with_pump(0.5)
            .with_dephasing(0.2);
        let l = build_liouvillian(&s, &p).unwrap();
        let opts = SteadyStateOptions::default();
        let direct = steady_state(&l, &opts).unwrap();
        let d = s.dim();
        let mut is_pop = vec![false; d * d];
        for i in 0..d {
            is_pop[i * (d + 1)] = true;
        }
        let sector = components(l.matrix())
            .into_iter()
            .find(|c| c.iter().any(|&k| is_pop[k]))
            .unwrap();
        let m = l.matrix().principal_submatrix(&sector);
        let t: Vec<Complex64> = sector.iter().map(|&k| if is_pop[k] { ONE } else { ZERO }).collect();
        let x = inverse_iteration(&m, &t, m.norm_inf(), &opts).unwrap();
        for (&k, v) in sector.iter().zip(&x) {
            assert!((direct.as_vec()[k] - v).norm() < 1e-9);
        }
    }
}
