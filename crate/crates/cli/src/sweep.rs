//! Evaluating one row per sweep point.

use rayon::prelude::*;
use tavis_core::collective::{
    analytic_g2_three, analytic_g2_two, build_reduced_liouvillian, ReducedParams, SeriesOrder,
    ThreeEmitterForm,
};
use tavis_core::liouville::{
    converge_cutoff_with, steady_state, CutoffObservable, CutoffOptions, SteadyStateOptions,
};
use tavis_core::mcwf::{estimate_steady, TrajectoryModel};
use tavis_core::observables::{g2_zero_collective, populations};
use tavis_core::space::{build_space, emitter_space, EmitterBasis, SystemParams};
use tavis_core::{Error, Result};

use crate::config::{Method, SweepSpec, TrajectoryOverrides};

/// `auto` solves directly while the Hilbert space stays at or below this.
pub const AUTO_DIRECT_MAX_DIM: usize = 4096;

/// Photon cutoff for trajectories when none is given.
pub const MCWF_DEFAULT_NMAX: usize = 2;

const SAMPLES_PER_RUN: f64 = 500.0;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Values {
    pub n_max_used: Option<usize>,
    pub n_a: Option<f64>,
    pub n_j: Option<f64>,
    pub total_nx: Option<f64>,
    pub g2_cavity: Option<f64>,
    pub g2_collective: Option<f64>,
    pub g2_err: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub params: SystemParams,
    pub method_used: Method,
    pub result: std::result::Result<Values, String>,
}

/// Method `auto` resolves to for these parameters.
pub fn resolve_method(method: Method, params: &SystemParams, nmax: Option<usize>) -> Method {
    if method != Method::Auto {
        return method;
    }
    let photons = nmax.unwrap_or(MCWF_DEFAULT_NMAX) + 1;
    let dim = 1usize
        .checked_shl(params.n_emitters as u32)
        .and_then(|e| e.checked_mul(photons));
    match dim {
        Some(d) if d <= AUTO_DIRECT_MAX_DIM => Method::Direct,
        _ => Method::Mcwf,
    }
}

fn defined(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::ZeroIntensity { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn direct(p: &SystemParams, nmax: Option<usize>) -> Result<Values> {
    let mut opts = CutoffOptions::default();
    if let Some(n) = nmax {
        let dim = (n + 1) << p.n_emitters;
        opts.budget = dim * dim;
    }
    let r = converge_cutoff_with(p, &CutoffObservable::ALL, &opts)?;
    let v = &r.values;
    Ok(Values {
        n_max_used: Some(r.n_max),
        n_a: v[0],
        n_j: v[1],
        total_nx: v[2],
        g2_cavity: v[3],
        g2_collective: v[4],
        g2_err: None,
    })
}

fn adiabatic(p: &SystemParams) -> Result<Values> {
    let rp = ReducedParams::from_system(p)?;
    let l = build_reduced_liouvillian(&rp, EmitterBasis::Coupled)?;
    let rho = steady_state(&l, &SteadyStateOptions::default())?;
    let pops = populations(&rho, &emitter_space(p.n_emitters)?)?;
    let g2 = defined(g2_zero_collective(&rho))?;
    // a ≈ −(2g/κ) J₋ once the cavity is eliminated
    Ok(Values {
        n_a: Some(rp.collective_rate / p.kappa * pops.n_j),
        n_j: Some(pops.n_j),
        total_nx: Some(pops.total_nx),
        g2_cavity: g2,
        g2_collective: g2,
        ..Values::default()
    })
}

fn analytic(p: &SystemParams) -> Result<Values> {
    let rp = ReducedParams::from_system(p)?;
    if p.dephasing > 0.0 {
        return Err(Error::InvalidParameter {
            key: "dephasing",
            reason: "the analytic forms assume no dephasing".into(),
        });
    }
    let (gc, px) = (rp.collective_rate, rp.pump_px);
    let g2 = match p.n_emitters {
        2 => analytic_g2_two(gc, px, SeriesOrder::Series),
        3 => analytic_g2_three(gc, px, ThreeEmitterForm::ClosedForm),
        n => {
            return Err(Error::InvalidParameter {
                key: "n_emitters",
                reason: format!("analytic forms exist for 2 and 3 emitters, got {n}"),
            })
        }
    };
    let g2 = finite(g2);
    Ok(Values {
        g2_cavity: g2,
        g2_collective: g2,
        ..Values::default()
    })
}

fn mcwf(p: &SystemParams, nmax: Option<usize>, over: &TrajectoryOverrides) -> Result<Values> {
    let n_max = nmax.unwrap_or(MCWF_DEFAULT_NMAX);
    let space = build_space(p.n_emitters, n_max)?;
    let model = TrajectoryModel::full(&space, p)?;
    let mut cfg = model.default_config();
    if let Some(n) = over.n_trajectories {
        cfg.n_trajectories = n;
    }
    if let Some(t) = over.t_burn_in {
        cfg.t_burn_in = t;
    }
    if let Some(t) = over.t_total {
        cfg.t_total = t;
    }
    if let Some(s) = over.seed {
        cfg.seed = s;
    }
    cfg.sample_interval = (cfg.t_total - cfg.t_burn_in) / SAMPLES_PER_RUN;
    let est = estimate_steady(&model, &cfg, &model.standard_observables()?)?;
    let mean = |name: &str| est.get(name).and_then(|e| finite(e.mean));
    let g2_cavity = mean("g2_cavity");
    Ok(Values {
        n_max_used: Some(n_max),
        n_a: mean("n_a"),
        n_j: mean("n_J"),
        total_nx: mean("total_nx"),
        g2_cavity,
        g2_collective: mean("g2_collective"),
        g2_err: g2_cavity.and_then(|_| est.get("g2_cavity").map(|e| e.std_error)),
    })
}

/// Solves a single parameter set with the resolved method.
pub fn evaluate_point(spec: &SweepSpec, params: &SystemParams) -> Row {
    let method = resolve_method(spec.method, params, spec.nmax);
    let result = match method {
        Method::Direct | Method::Auto => direct(params, spec.nmax),
        Method::Mcwf => mcwf(params, spec.nmax, &spec.trajectories),
        Method::Adiabatic => adiabatic(params),
        Method::Analytic => analytic(params),
    };
    if let Err(e) = &result {
        log::error!("N={} kappa={}: {e}", params.n_emitters, params.kappa);
    }
    Row {
        params: *params,
        method_used: method,
        result: result.map_err(|e| e.to_string()),
    }
}

/// All grid points, evaluated in parallel and returned in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Vec<Row> {
    spec.points()
        .par_iter()
        .map(|p| evaluate_point(spec, p))
        .collect()
}
