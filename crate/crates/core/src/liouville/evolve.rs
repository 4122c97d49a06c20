use num_complex::Complex64;

use super::blocks::components;
use super::density::DensityMatrix;
use super::Superoperator;
use crate::error::{Error, Result};
use crate::ode::{Dopri5, OdeOptions};

/// Integrator settings for [`evolve`].
pub type EvolveOptions = OdeOptions;

/// ρ(t) at each grid time, starting from `rho0` at t = 0.
pub fn evolve(
    l: &Superoperator,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<DensityMatrix>> {
    l.tag().ensure_eq(&rho0.tag())?;
    rho0.validate()?;
    let out = propagate(l, rho0.as_vec(), t_grid, opts)?;
    Ok(out
        .into_iter()
        .map(|v| DensityMatrix::from_vec_unchecked(l.tag(), v))
        .collect())
}

/// Integrates `ẋ = L x` for an arbitrary operator vector. Only the sectors of
/// `L` that touch the support of `x0` are integrated.
pub(crate) fn propagate(
    l: &Superoperator,
    x0: &[Complex64],
    t_grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<Vec<Complex64>>> {
    if t_grid.first().is_some_and(|&t| t < 0.0) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter {
            key: "t_grid",
            reason: "times must be nondecreasing and start at or after 0".into(),
        });
    }
    let idx: Vec<usize> = {
        let mut v: Vec<usize> = components(l.matrix())
            .into_iter()
            .filter(|c| c.iter().any(|&k| x0[k] != Complex64::new(0.0, 0.0)))
            .flatten()
            .collect();
        v.sort_unstable();
        v
    };
    let m = l.matrix().principal_submatrix(&idx);
    let y0: Vec<Complex64> = idx.iter().map(|&k| x0[k]).collect();
    let embed = |y: &[Complex64]| {
        let mut full = vec![Complex64::new(0.0, 0.0); x0.len()];
        for (&k, &v) in idx.iter().zip(y) {
            full[k] = v;
        }
        full
    };

    let mut f = |y: &[Complex64], dy: &mut [Complex64]| m.mul_vec_into(y, dy);
    let mut out = Vec::with_capacity(t_grid.len());
    let Some(&t_end) = t_grid.last() else {
        return Ok(out);
    };
    if m.nnz() == 0 || t_end == 0.0 {
        return Ok(t_grid.iter().map(|_| embed(&y0)).collect());
    }
    let mut solver = Dopri5::new(&mut f, 0.0, y0.clone(), *opts);
    let mut buf = y0.clone();
    let mut next = 0;
    while next < t_grid.len() && t_grid[next] == 0.0 {
        out.push(embed(&y0));
        next += 1;
    }
    while next < t_grid.len() {
        solver.step(&mut f, t_end)?;
        while next < t_grid.len() && t_grid[next] <= solver.t() {
            solver.interpolate(t_grid[next], &mut buf);
            out.push(embed(&buf));
            next += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{build_liouvillian, dissipator};
    use crate::operators::{cavity_op, CavityOp};
    use crate::space::{build_space, BasisState, SystemParams};

    #[test]
    fn zero_generator_keeps_state() {
        let s = build_space(1, 1).unwrap();
        let l = Superoperator::zero(s.tag());
        let rho0 = DensityMatrix::basis_state(s.tag(), 3);
        let out = evolve(&l, &rho0, &[0.0, 1.0, 5.0], &EvolveOptions::default()).unwrap();
        assert!(out.iter().all(|r| r == &rho0));
    }

    #[test]
    fn emitter_decay_is_exponential() {
        let s = build_space(1, 0).unwrap();
        let p = SystemParams::new(1).with_gamma(0.4);
        let l = build_liouvillian(&s, &p).unwrap();
        let rho0 = DensityMatrix::basis_state(s.tag(), 1);
        let grid: Vec<f64> = (0..20).map(|k| 0.5 * k as f64).collect();
        let out = evolve(&l, &rho0, &grid, &EvolveOptions::default()).unwrap();
        for (t, r) in grid.iter().zip(&out) {
            let expected = (-0.4 * t).exp();
            assert!((r.get(1, 1).re - expected).abs() <= 1e-7 * expected);
            assert!((r.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cavity_decay_from_fock_state() {
        let s = build_space(1, 3).unwrap();
        let a = cavity_op(&s, CavityOp::Annihilate);
        let l = dissipator(&a, 2.0).unwrap();
        let start = s.index(BasisState {
            photons: 3,
            pattern: 0,
        });
        let rho0 = DensityMatrix::basis_state(s.tag(), start);
        let grid = [0.0, 0.3, 1.0, 2.5];
        let out = evolve(&l, &rho0, &grid, &EvolveOptions::default()).unwrap();
        for (t, r) in grid.iter().zip(&out) {
            let n: f64 = (0..s.dim())
                .map(|i| s.decode(i).photons as f64 * r.get(i, i).re)
                .sum();
            let expected = 3.0 * (-2.0 * t).exp();
            assert!((n - expected).abs() <= 1e-6 * expected);
        }
    }
}
