use std::collections::BTreeMap;

use super::density::DensityMatrix;
use super::steady::{steady_state, SteadyStateOptions};
use super::build_liouvillian;
use crate::error::{Error, Result};
use crate::observables::{g2_zero_cavity, g2_zero_collective, populations};
use crate::space::{build_space_with_budget, CompositeSpace, SystemParams, DEFAULT_VEC_BUDGET};

pub const DEFAULT_CUTOFF_TOL: f64 = 1e-3;

/// Values below this are treated as zero when judging relative change.
const ABS_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutoffObservable {
    CavityPopulation,
    CollectiveIntensity,
    TotalEmitterPopulation,
    G2Cavity,
    G2Collective,
}

impl CutoffObservable {
    pub const ALL: [CutoffObservable; 5] = [
        Self::CavityPopulation,
        Self::CollectiveIntensity,
        Self::TotalEmitterPopulation,
        Self::G2Cavity,
        Self::G2Collective,
    ];
}

#[derive(Clone, Debug)]
pub struct CutoffResult {
    pub n_max: usize,
    pub space: CompositeSpace,
    pub state: DensityMatrix,
    /// Observable values at `n_max`, `None` where undefined (zero intensity).
    pub values: Vec<Option<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffOptions {
    pub rel_tol: f64,
    pub budget: usize,
    pub steady: SteadyStateOptions,
}

impl Default for CutoffOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_CUTOFF_TOL,
            budget: DEFAULT_VEC_BUDGET,
            steady: SteadyStateOptions::default(),
        }
    }
}

pub(crate) fn evaluate(
    state: &DensityMatrix,
    space: &CompositeSpace,
    observables: &[CutoffObservable],
) -> Result<Vec<Option<f64>>> {
    let pops = populations(state, space)?;
    observables
        .iter()
        .map(|o| {
            let undefined = |r: Result<f64>| match r {
                Ok(v) => Ok(Some(v)),
                Err(Error::ZeroIntensity { .. }) => Ok(None),
                Err(e) => Err(e),
            };
            match o {
                CutoffObservable::CavityPopulation => Ok(Some(pops.n_a)),
                CutoffObservable::CollectiveIntensity => Ok(Some(pops.n_j)),
                CutoffObservable::TotalEmitterPopulation => Ok(Some(pops.total_nx)),
                CutoffObservable::G2Cavity => undefined(g2_zero_cavity(state, space)),
                CutoffObservable::G2Collective => undefined(g2_zero_collective(state)),
            }
        })
        .collect()
}

fn close(a: &[Option<f64>], b: &[Option<f64>], rel_tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| match (x, y) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() < rel_tol * x.abs().max(y.abs()).max(ABS_FLOOR),
        _ => false,
    })
}

fn as_reported(v: &[Option<f64>]) -> Vec<f64> {
    v.iter().map(|x| x.unwrap_or(f64::NAN)).collect()
}

/// Smallest photon cutoff whose observables move by less than `rel_tol` when
/// the cutoff grows by two, found by doubling and then stepping back down.
pub fn converge_cutoff(
    params: &SystemParams,
    observables: &[CutoffObservable],
    rel_tol: f64,
) -> Result<CutoffResult> {
    converge_cutoff_with(
        params,
        observables,
        &CutoffOptions {
            rel_tol,
            ..CutoffOptions::default()
        },
    )
}

pub fn converge_cutoff_with(
    params: &SystemParams,
    observables: &[CutoffObservable],
    opts: &CutoffOptions,
) -> Result<CutoffResult> {
    params.validate()?;
    if !(opts.rel_tol > 0.0) {
        return Err(Error::InvalidParameter {
            key: "rel_tol",
            reason: format!("must be positive, got {}", opts.rel_tol),
        });
    }
    let mut cache: BTreeMap<usize, CutoffResult> = BTreeMap::new();
    let solve = |n: usize, cache: &mut BTreeMap<usize, CutoffResult>| -> Result<()> {
        if cache.contains_key(&n) {
            return Ok(());
        }
        let space = match build_space_with_budget(params.n_emitters, n, opts.budget) {
            Ok(s) => s,
            Err(Error::SpaceTooLarge { .. }) => {
                let mut done = cache.iter().rev();
                let last = done.next();
                let prev = done.next();
                return Err(Error::CutoffNotConverged {
                    n_max: last.map_or(0, |(k, _)| *k),
                    last: last.map(|(_, r)| as_reported(&r.values)).unwrap_or_default(),
                    previous: prev.map(|(_, r)| as_reported(&r.values)).unwrap_or_default(),
                });
            }
            Err(e) => return Err(e),
        };
        let l = build_liouvillian(&space, params)?;
        let state = steady_state(&l, &opts.steady)?;
        let values = evaluate(&state, &space, observables)?;
        log::debug!("cutoff n_max={n}: {values:?}");
        cache.insert(
            n,
            CutoffResult {
                n_max: n,
                space,
                state,
                values,
            },
        );
        Ok(())
    };
    let converged_at = |n: usize, cache: &mut BTreeMap<usize, CutoffResult>| -> Result<bool> {
        solve(n, cache)?;
        solve(n + 2, cache)?;
        Ok(close(&cache[&n].values, &cache[&(n + 2)].values, opts.rel_tol))
    };

    // n_max = 0 cannot carry the exchange term, so the scan starts at 1
    let mut not_converged = 0;
    let mut n = 1;
    while !converged_at(n, &mut cache)? {
        not_converged = n;
        n *= 2;
    }
    let mut m = n - 1;
    while m > not_converged && converged_at(m, &mut cache)? {
        n = m;
        m -= 1;
    }
    Ok(cache.remove(&n).expect("converged cutoff is cached"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_cavity_converges_quickly() {
        let p = SystemParams::new(1)
            .with_kappa(1e4)
            .with_gamma(1e-4)
            .with_pump(1e-3);
        let r = converge_cutoff(&p, &CutoffObservable::ALL, 1e-3).unwrap();
        assert!(r.n_max <= 3);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let p = SystemParams::new(1)
            .with_kappa(1e-3)
            .with_pump(1.0);
        let opts = CutoffOptions {
            budget: 64,
            ..CutoffOptions::default()
        };
        match converge_cutoff_with(&p, &[CutoffObservable::CavityPopulation], &opts) {
            Err(Error::CutoffNotConverged { last, previous, .. }) => {
                assert_eq!(last.len(), 1);
                assert_eq!(previous.len(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
