//! Quantum-trajectory unraveling of the master equation.
//!
//! Each trajectory draws from its own ChaCha8 stream, selected by the
//! trajectory index on top of the ensemble seed, so results do not depend on
//! how trajectories are scheduled over threads.

mod trajectory;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::collective::{reduced_jump_channels, ReducedParams};
use crate::error::{Error, Result};
use crate::liouville::build_hamiltonian;
use crate::liouville::jump_channels;
use crate::observables::INTENSITY_FLOOR;
use crate::ode::OdeOptions;
use crate::operators::{
    cavity_op, collective_op, emitter_op, CavityOp, CollectiveOp, EmitterOp, SparseOperator,
};
use crate::sparse::CscMatrix;
use crate::space::{emitter_space, CompositeSpace, SpaceTag, SystemParams};

/// Fewer contributing trajectories than this is an error.
pub const MIN_EFFECTIVE_SAMPLES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryConfig {
    pub n_trajectories: usize,
    pub t_burn_in: f64,
    pub t_total: f64,
    pub sample_interval: f64,
    pub seed: u64,
    /// Relative accuracy of ‖ψ‖² at located jump times.
    pub jump_tolerance: f64,
    pub ode: OdeOptions,
}

impl TrajectoryConfig {
    /// 10³ trajectories, burn-in of 5 slowest lifetimes, then 20 more
    /// sampled 500 times.
    pub fn default_for(rates: &[f64]) -> Self {
        let slowest = rates
            .iter()
            .copied()
            .filter(|r| *r > 0.0)
            .fold(f64::INFINITY, f64::min);
        let tau = if slowest.is_finite() { 1.0 / slowest } else { 1.0 };
        Self {
            n_trajectories: 1000,
            t_burn_in: 5.0 * tau,
            t_total: 25.0 * tau,
            sample_interval: 20.0 * tau / 500.0,
            seed: 0,
            jump_tolerance: 1e-10,
            ode: OdeOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key, reason: &str| {
            Err(Error::InvalidParameter {
                key,
                reason: reason.into(),
            })
        };
        if self.n_trajectories < 1 {
            return bad("n_trajectories", "must be at least 1");
        }
        if !(self.t_burn_in >= 0.0 && self.t_burn_in.is_finite()) {
            return bad("t_burn_in", "must be finite and nonnegative");
        }
        if !(self.t_total > self.t_burn_in && self.t_total.is_finite()) {
            return bad("t_total", "must be finite and exceed t_burn_in");
        }
        if !(self.sample_interval > 0.0) {
            return bad("sample_interval", "must be positive");
        }
        if !(self.jump_tolerance > 0.0 && self.jump_tolerance < 1.0) {
            return bad("jump_tolerance", "must lie in (0, 1)");
        }
        Ok(())
    }
}

/// H − (i/2) Σ_c C_c†C_c over the jump set of [`jump_channels`].
pub fn effective_hamiltonian(space: &CompositeSpace, params: &SystemParams) -> Result<SparseOperator> {
    let h = build_hamiltonian(space, params)?;
    let channels = jump_channels(space, params)?;
    with_decay(&h, &channels)
}

fn with_decay(h: &SparseOperator, channels: &[(String, SparseOperator, f64)]) -> Result<SparseOperator> {
    let mut out = h.matrix().clone();
    for (_, c, rate) in channels {
        c.tag().ensure_eq(&h.tag())?;
        let cdc = c.matrix().adjoint().matmul(c.matrix());
        out = out.lincomb(Complex64::new(1.0, 0.0), &cdc, Complex64::new(0.0, -0.5 * rate));
    }
    Ok(SparseOperator::new(h.tag(), out))
}

#[derive(Clone, Debug)]
pub(crate) struct Channel {
    name: String,
    /// √rate · C.
    op: CscMatrix,
}

/// Everything a trajectory needs: the no-jump generator, the jump operators
/// and the initial state.
#[derive(Clone, Debug)]
pub struct TrajectoryModel {
    space: CompositeSpace,
    has_cavity: bool,
    h_eff: SparseOperator,
    /// −i H_eff.
    generator: CscMatrix,
    channels: Vec<Channel>,
    rates: Vec<f64>,
    initial: Vec<Complex64>,
}

impl TrajectoryModel {
    /// Cavity plus emitters, starting from vacuum with all emitters down.
    pub fn full(space: &CompositeSpace, params: &SystemParams) -> Result<Self> {
        let h = build_hamiltonian(space, params)?;
        let mut m = Self::from_parts(space, &h, jump_channels(space, params)?)?;
        m.has_cavity = true;
        Ok(m)
    }

    /// Cavity-eliminated emitters in the uncoupled basis.
    pub fn reduced(rp: &ReducedParams) -> Result<Self> {
        let space = emitter_space(rp.n_emitters)?;
        let h = SparseOperator::zero(space.tag());
        Self::from_parts(&space, &h, reduced_jump_channels(rp)?)
    }

    /// Arbitrary Hamiltonian and named channels `(name, C, rate)`.
    pub fn from_parts(
        space: &CompositeSpace,
        h: &SparseOperator,
        channels: Vec<(String, SparseOperator, f64)>,
    ) -> Result<Self> {
        h.tag().ensure_eq(&space.tag())?;
        let h_eff = with_decay(h, &channels)?;
        let generator = h_eff.matrix().scale(Complex64::new(0.0, -1.0));
        let rates = channels.iter().map(|c| c.2).collect();
        let channels = channels
            .into_iter()
            .map(|(name, c, rate)| Channel {
                name,
                op: c.matrix().scale(Complex64::new(rate.sqrt(), 0.0)),
            })
            .collect();
        let mut initial = vec![Complex64::new(0.0, 0.0); space.dim()];
        initial[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            space: *space,
            has_cavity: space.n_max() > 0,
            h_eff,
            generator,
            channels,
            rates,
            initial,
        })
    }

    /// Replaces the initial state; it is normalized here.
    pub fn with_initial(mut self, psi: &[Complex64]) -> Result<Self> {
        let n: f64 = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if psi.len() != self.space.dim() || !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidState {
                detail: format!(
                    "initial state needs {} finite components with nonzero norm",
                    self.space.dim()
                ),
            });
        }
        self.initial = psi.iter().map(|v| v / n).collect();
        Ok(self)
    }

    pub fn tag(&self) -> SpaceTag {
        self.space.tag()
    }

    pub fn effective_hamiltonian(&self) -> &SparseOperator {
        &self.h_eff
    }

    pub fn channel_names(&self) -> Vec<&str> {
        self.channels.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn default_config(&self) -> TrajectoryConfig {
        TrajectoryConfig::default_for(&self.rates)
    }

    /// n_a (with a cavity), n_J, total_nx, g2_cavity (with a cavity) and
    /// g2_collective.
    pub fn standard_observables(&self) -> Result<Vec<Observable>> {
        let s = &self.space;
        let mut out = Vec::new();
        if self.has_cavity {
            out.push(Observable::mean("n_a", cavity_op(s, CavityOp::Number)));
        }
        out.push(Observable::mean("n_J", collective_op(s, CollectiveOp::JpJm)));
        let mut nx = SparseOperator::zero(s.tag());
        for i in 0..s.n_emitters() {
            nx = nx.plus(&emitter_op(s, i, EmitterOp::Population)?)?;
        }
        out.push(Observable::mean("total_nx", nx));
        if self.has_cavity {
            out.push(Observable::g2("g2_cavity", cavity_op(s, CavityOp::Annihilate)));
        }
        out.push(Observable::g2("g2_collective", collective_op(s, CollectiveOp::JMinus)));
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub enum Observable {
    /// ⟨O⟩, real part.
    Mean { name: String, op: SparseOperator },
    /// ⟨A†A†AA⟩ / ⟨A†A⟩² from ensemble means of numerator and intensity.
    G2 { name: String, lowering: SparseOperator },
}

impl Observable {
    pub fn mean(name: &str, op: SparseOperator) -> Self {
        Self::Mean {
            name: name.to_string(),
            op,
        }
    }

    pub fn g2(name: &str, lowering: SparseOperator) -> Self {
        Self::G2 {
            name: name.to_string(),
            lowering,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Mean { name, .. } | Self::G2 { name, .. } => name,
        }
    }

    fn tag(&self) -> SpaceTag {
        match self {
            Self::Mean { op, .. } => op.tag(),
            Self::G2 { lowering, .. } => lowering.tag(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub channel: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub sample_times: Vec<f64>,
    /// Normalized states at `sample_times`.
    pub states: Vec<Vec<Complex64>>,
    pub jumps: Vec<JumpEvent>,
}

pub fn run_trajectory(
    model: &TrajectoryModel,
    config: &TrajectoryConfig,
    trajectory_index: usize,
) -> Result<Trajectory> {
    config.validate()?;
    let mut out = Trajectory {
        sample_times: Vec::new(),
        states: Vec::new(),
        jumps: Vec::new(),
    };
    let mut jumps = Vec::new();
    trajectory::simulate(
        model,
        config,
        trajectory_index,
        |t, psi| {
            out.sample_times.push(t);
            out.states.push(psi.to_vec());
        },
        |time, channel| jumps.push(JumpEvent { time, channel }),
    )?;
    out.jumps = jumps;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableEstimate {
    pub name: String,
    /// NaN for a correlation whose intensity vanishes.
    pub mean: f64,
    pub std_error: f64,
    /// Trajectories contributing a batch.
    pub effective_samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelJumps {
    pub name: String,
    /// Jumps after burn-in, summed over trajectories.
    pub count: u64,
    /// `count` per trajectory per unit sampled time.
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleEstimate {
    pub observables: Vec<ObservableEstimate>,
    pub jumps: Vec<ChannelJumps>,
    pub n_trajectories: usize,
}

impl EnsembleEstimate {
    pub fn get(&self, name: &str) -> Option<&ObservableEstimate> {
        self.observables.iter().find(|o| o.name == name)
    }
}

/// Per-trajectory time averages: one value per Mean, a pair per G2.
struct Batch {
    values: Vec<[f64; 2]>,
    samples: usize,
    jumps: Vec<u64>,
}

fn run_batch(
    model: &TrajectoryModel,
    config: &TrajectoryConfig,
    observables: &[Observable],
    index: usize,
) -> Result<Batch> {
    let mut values = vec![[0.0; 2]; observables.len()];
    let mut samples = 0usize;
    let mut jumps = vec![0u64; model.channels.len()];
    let d = model.space.dim();
    let mut once = vec![Complex64::new(0.0, 0.0); d];
    let mut twice = vec![Complex64::new(0.0, 0.0); d];
    trajectory::simulate(
        model,
        config,
        index,
        |_, psi| {
            samples += 1;
            for (acc, obs) in values.iter_mut().zip(observables) {
                match obs {
                    Observable::Mean { op, .. } => {
                        op.matrix().mul_vec_into(psi, &mut once);
                        let e: Complex64 = psi.iter().zip(&once).map(|(p, q)| p.conj() * q).sum();
                        acc[0] += e.re;
                    }
                    Observable::G2 { lowering, .. } => {
                        let a = lowering.matrix();
                        a.mul_vec_into(psi, &mut once);
                        a.mul_vec_into(&once, &mut twice);
                        acc[0] += twice.iter().map(|v| v.norm_sqr()).sum::<f64>();
                        acc[1] += once.iter().map(|v| v.norm_sqr()).sum::<f64>();
                    }
                }
            }
        },
        |t, c| {
            if t > config.t_burn_in {
                jumps[c] += 1;
            }
        },
    )?;
    let s = samples.max(1) as f64;
    for v in &mut values {
        v[0] /= s;
        v[1] /= s;
    }
    Ok(Batch {
        values,
        samples,
        jumps,
    })
}

/// Time-plus-ensemble averages over post-burn-in samples, with batch-means
/// standard errors (one batch per trajectory).
pub fn estimate_steady(
    model: &TrajectoryModel,
    config: &TrajectoryConfig,
    observables: &[Observable],
) -> Result<EnsembleEstimate> {
    config.validate()?;
    for o in observables {
        o.tag().ensure_eq(&model.tag())?;
    }
    let batches: Vec<Batch> = (0..config.n_trajectories)
        .into_par_iter()
        .map(|k| run_batch(model, config, observables, k))
        .collect::<Result<_>>()?;
    let used: Vec<&Batch> = batches.iter().filter(|b| b.samples > 0).collect();
    let k = used.len();
    if k < MIN_EFFECTIVE_SAMPLES {
        return Err(Error::InsufficientSamples {
            observable: observables.first().map_or("jumps", |o| o.name()).to_string(),
            effective: k,
            required: MIN_EFFECTIVE_SAMPLES,
        });
    }
    let kf = k as f64;
    let estimates = observables
        .iter()
        .enumerate()
        .map(|(i, obs)| {
            let xs: Vec<f64> = used.iter().map(|b| b.values[i][0]).collect();
            let (mean, std_error) = match obs {
                Observable::Mean { .. } => {
                    let (m, var) = mean_var(&xs);
                    (m, (var / kf).sqrt())
                }
                Observable::G2 { .. } => {
                    let ys: Vec<f64> = used.iter().map(|b| b.values[i][1]).collect();
                    ratio_estimate(&xs, &ys)
                }
            };
            ObservableEstimate {
                name: obs.name().to_string(),
                mean,
                std_error,
                effective_samples: k,
            }
        })
        .collect();
    let window = kf * (config.t_total - config.t_burn_in);
    let jumps = model
        .channels
        .iter()
        .enumerate()
        .map(|(c, ch)| {
            let count: u64 = batches.iter().map(|b| b.jumps[c]).sum();
            ChannelJumps {
                name: ch.name.clone(),
                count,
                rate: count as f64 / window,
            }
        })
        .collect();
    Ok(EnsembleEstimate {
        observables: estimates,
        jumps,
        n_trajectories: config.n_trajectories,
    })
}

/// Mean and unbiased sample variance.
fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, v)
}

/// X̄ / Ȳ² with a delta-method standard error.
fn ratio_estimate(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let (mx, vx) = mean_var(xs);
    let (my, vy) = mean_var(ys);
    if my <= INTENSITY_FLOOR {
        return (f64::NAN, f64::NAN);
    }
    let cov = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    let dx = 1.0 / (my * my);
    let dy = -2.0 * mx / (my * my * my);
    let var = dx * dx * vx + dy * dy * vy + 2.0 * dx * dy * cov;
    (mx * dx, (var.max(0.0) / n).sqrt())
}
