//! Waiting-time unraveling of a single trajectory.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{TrajectoryConfig, TrajectoryModel};
use crate::error::Result;
use crate::ode::Dopri5;

/// Below this squared norm the state and the jump threshold are rescaled
/// together, which leaves the jump statistics unchanged.
const RESCALE_BELOW: f64 = 1e-3;

const MAX_ROOT_ITERATIONS: usize = 200;

pub(crate) fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// Uniform on (0, 1].
fn threshold(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Runs trajectory `index`, calling `on_sample(t, ψ)` with the normalized
/// state at each sampling time and `on_jump(t, channel)` after each jump.
pub(crate) fn simulate(
    model: &TrajectoryModel,
    config: &TrajectoryConfig,
    index: usize,
    mut on_sample: impl FnMut(f64, &[Complex64]),
    mut on_jump: impl FnMut(f64, usize),
) -> Result<()> {
    let mut rng = stream(config.seed, index);
    let gen = &model.generator;
    let mut f = |y: &[Complex64], dy: &mut [Complex64]| gen.mul_vec_into(y, dy);
    let d = model.initial.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); d];
    let mut emit = |t: f64, psi: &[Complex64], buf: &mut [Complex64]| {
        let s = norm2(psi).sqrt().recip();
        for (b, p) in buf.iter_mut().zip(psi) {
            *b = p * s;
        }
        on_sample(t, buf);
    };

    let mut ode = Dopri5::new(&mut f, 0.0, model.initial.clone(), config.ode);
    let mut thr = threshold(&mut rng);
    let mut k_sample = 0usize;
    let sample_time = |k: usize| config.t_burn_in + k as f64 * config.sample_interval;
    let last = config.t_total * (1.0 + 1e-12);
    if sample_time(0) <= 0.0 {
        emit(0.0, &model.initial, &mut buf);
        k_sample = 1;
    }

    let mut scratch = vec![Complex64::new(0.0, 0.0); d];
    while ode.t() < config.t_total {
        ode.step(&mut f, config.t_total)?;
        let n2 = norm2(ode.y());
        let t_jump = (n2 <= thr).then(|| jump_time(&ode, n2, thr, config.jump_tolerance, &mut scratch));
        let t_end = t_jump.unwrap_or(ode.t());
        while sample_time(k_sample) <= t_end.min(last) {
            let ts = sample_time(k_sample);
            ode.interpolate(ts.min(ode.t()), &mut scratch);
            emit(ts, &scratch, &mut buf);
            k_sample += 1;
        }
        if let Some(tj) = t_jump {
            ode.interpolate(tj, &mut scratch);
            let kicked: Vec<Vec<Complex64>> =
                model.channels.iter().map(|c| c.op.mul_vec(&scratch)).collect();
            let weights: Vec<f64> = kicked.iter().map(|v| norm2(v)).collect();
            let total: f64 = weights.iter().sum();
            thr = threshold(&mut rng);
            if total > 0.0 {
                let mut u = rng.random::<f64>() * total;
                let mut chosen = weights.len() - 1;
                for (c, &w) in weights.iter().enumerate() {
                    if u < w {
                        chosen = c;
                        break;
                    }
                    u -= w;
                }
                let s = weights[chosen].sqrt().recip();
                let psi: Vec<Complex64> = kicked[chosen].iter().map(|v| v * s).collect();
                ode.reset(&mut f, tj, &psi);
                on_jump(tj, chosen);
            } else {
                let s = norm2(&scratch).sqrt().recip();
                let psi: Vec<Complex64> = scratch.iter().map(|v| v * s).collect();
                ode.reset(&mut f, tj, &psi);
            }
        } else if n2 < RESCALE_BELOW {
            let s = n2.sqrt().recip();
            let psi: Vec<Complex64> = ode.y().iter().map(|v| v * s).collect();
            thr /= n2;
            let t = ode.t();
            ode.reset(&mut f, t, &psi);
        }
    }
    Ok(())
}

/// Illinois regula falsi for ‖ψ(t)‖² = thr on the last step's interpolant.
fn jump_time(ode: &Dopri5, n2_end: f64, thr: f64, rel_tol: f64, buf: &mut [Complex64]) -> f64 {
    let (mut a, mut b) = (ode.t_prev(), ode.t());
    ode.interpolate(a, buf);
    let mut fa = norm2(buf) - thr;
    let mut fb = n2_end - thr;
    if fb == 0.0 || fa <= 0.0 {
        return if fa <= 0.0 { a } else { b };
    }
    let mut side = 0i8;
    for _ in 0..MAX_ROOT_ITERATIONS {
        let mut t = (a * fb - b * fa) / (fb - fa);
        if !(t > a && t < b) {
            t = 0.5 * (a + b);
        }
        ode.interpolate(t, buf);
        let ft = norm2(buf) - thr;
        if ft.abs() <= rel_tol * thr || b - a <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
            return t;
        }
        if ft > 0.0 {
            a = t;
            fa = ft;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = t;
            fb = ft;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    b
}
