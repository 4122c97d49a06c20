//! Dormand–Prince 5(4) for autonomous linear-ish systems `y' = f(y)` with
//! Hairer's continuous extension for dense output.

use num_complex::Complex64;

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 100_000_000,
        }
    }
}

/// Adaptive integrator state. After each accepted step the solution between
/// `t_prev()` and `t()` is available through [`Dopri5::interpolate`].
pub struct Dopri5 {
    opts: OdeOptions,
    t: f64,
    t_prev: f64,
    h: f64,
    y: Vec<Complex64>,
    k: [Vec<Complex64>; 7],
    tmp: Vec<Complex64>,
    ynew: Vec<Complex64>,
    cont: [Vec<Complex64>; 5],
    facold: f64,
    steps: usize,
}

impl Dopri5 {
    pub fn new<F>(f: &mut F, t0: f64, y0: Vec<Complex64>, opts: OdeOptions) -> Self
    where
        F: FnMut(&[Complex64], &mut [Complex64]),
    {
        let n = y0.len();
        let zero = || vec![Complex64::new(0.0, 0.0); n];
        let mut k: [Vec<Complex64>; 7] = std::array::from_fn(|_| zero());
        f(&y0, &mut k[0]);
        let mut s = Self {
            opts,
            t: t0,
            t_prev: t0,
            h: 0.0,
            y: y0,
            k,
            tmp: zero(),
            ynew: zero(),
            cont: std::array::from_fn(|_| zero()),
            facold: 1e-4,
            steps: 0,
        };
        s.h = s.initial_step(f);
        for (c, y) in s.cont[0].iter_mut().zip(&s.y) {
            *c = *y;
        }
        s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn t_prev(&self) -> f64 {
        self.t_prev
    }

    pub fn y(&self) -> &[Complex64] {
        &self.y
    }

    fn scale(&self, a: Complex64, b: Complex64) -> f64 {
        self.opts.atol + self.opts.rtol * a.norm().max(b.norm())
    }

    fn rms_scaled(&self, v: &[Complex64], reference: &[Complex64]) -> f64 {
        let n = v.len().max(1) as f64;
        let s: f64 = v
            .iter()
            .zip(reference)
            .map(|(x, r)| {
                let q = x.norm() / self.scale(*r, *r);
                q * q
            })
            .sum();
        (s / n).sqrt()
    }

    /// Starting step heuristic from Hairer, Nørsett & Wanner.
    fn initial_step<F>(&mut self, f: &mut F) -> f64
    where
        F: FnMut(&[Complex64], &mut [Complex64]),
    {
        let d0 = self.rms_scaled(&self.y, &self.y);
        let d1 = self.rms_scaled(&self.k[0], &self.y);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(self.opts.max_step);
        for ((t, y), k) in self.tmp.iter_mut().zip(&self.y).zip(&self.k[0]) {
            *t = y + h0 * k;
        }
        f(&self.tmp, &mut self.k[1]);
        let diff: Vec<Complex64> = self.k[1]
            .iter()
            .zip(&self.k[0])
            .map(|(a, b)| (a - b) / h0)
            .collect();
        let d2 = self.rms_scaled(&diff, &self.y);
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.opts.max_step)
    }

    /// Takes one accepted step without passing `t_limit`.
    pub fn step<F>(&mut self, f: &mut F, t_limit: f64) -> Result<()>
    where
        F: FnMut(&[Complex64], &mut [Complex64]),
    {
        let n = self.y.len();
        loop {
            self.steps += 1;
            if self.steps > self.opts.max_steps {
                return Err(Error::StepSizeUnderflow { time: self.t });
            }
            let mut h = self.h.min(self.opts.max_step);
            let remaining = t_limit - self.t;
            if h >= remaining {
                h = remaining;
            }
            if h <= 1e-14 * self.t.abs().max(1.0) && remaining > h {
                return Err(Error::StepSizeUnderflow { time: self.t });
            }

            let (k, tmp, y) = (&mut self.k, &mut self.tmp, &self.y);
            macro_rules! stage {
                ($out:expr, $($c:expr => $ki:expr),+) => {{
                    for i in 0..n {
                        tmp[i] = y[i] + h * ($($c * k[$ki][i] +)+ Complex64::new(0.0, 0.0));
                    }
                    f(tmp, &mut k[$out]);
                }};
            }
            stage!(1, A21 => 0);
            stage!(2, A31 => 0, A32 => 1);
            stage!(3, A41 => 0, A42 => 1, A43 => 2);
            stage!(4, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
            stage!(5, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
            for i in 0..n {
                self.ynew[i] = y[i]
                    + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i]
                        + A76 * k[5][i]);
            }
            f(&self.ynew, &mut self.k[6]);

            let k = &self.k;
            let mut acc = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i]
                        + E6 * k[5][i]
                        + E7 * k[6][i]);
                let q = e.norm() / self.scale(self.y[i], self.ynew[i]);
                acc += q * q;
            }
            let err = (acc / n.max(1) as f64).sqrt();
            if !err.is_finite() {
                self.h = 0.1 * h;
                continue;
            }

            let fac11 = err.powf(0.2 - BETA * 0.75);
            if err <= 1.0 {
                let fac = (fac11 / self.facold.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                self.facold = err.max(1e-4);
                for i in 0..n {
                    let y0 = self.y[i];
                    let y1 = self.ynew[i];
                    let ydiff = y1 - y0;
                    let bspl = h * k[0][i] - ydiff;
                    self.cont[0][i] = y0;
                    self.cont[1][i] = ydiff;
                    self.cont[2][i] = bspl;
                    self.cont[3][i] = ydiff - h * k[6][i] - bspl;
                    self.cont[4][i] = h
                        * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i]
                            + D6 * k[5][i]
                            + D7 * k[6][i]);
                }
                std::mem::swap(&mut self.y, &mut self.ynew);
                self.k.swap(0, 6);
                self.t_prev = self.t;
                self.t = if h == remaining { t_limit } else { self.t + h };
                self.h = h / fac;
                return Ok(());
            }
            self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }

    /// Solution at `t` within the last accepted step.
    pub fn interpolate(&self, t: f64, out: &mut [Complex64]) {
        let h = self.t - self.t_prev;
        if h == 0.0 {
            out.copy_from_slice(&self.y);
            return;
        }
        let th = (t - self.t_prev) / h;
        let th1 = 1.0 - th;
        let c = &self.cont;
        for (i, o) in out.iter_mut().enumerate() {
            *o = c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])));
        }
    }

    /// Restarts at time `t` from `y` (after a discontinuous state change).
    pub fn reset<F>(&mut self, f: &mut F, t: f64, y: &[Complex64])
    where
        F: FnMut(&[Complex64], &mut [Complex64]),
    {
        self.y.copy_from_slice(y);
        self.t = t;
        self.t_prev = t;
        f(&self.y, &mut self.k[0]);
        self.facold = 1e-4;
        self.h = self.initial_step(f);
        let (c, y) = (&mut self.cont[0], &self.y);
        c.copy_from_slice(y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_with_dense_output() {
        let lam = Complex64::new(-1.3, 4.0);
        let mut f = |y: &[Complex64], dy: &mut [Complex64]| dy[0] = lam * y[0];
        let mut s = Dopri5::new(&mut f, 0.0, vec![Complex64::new(1.0, 0.0)], OdeOptions::default());
        let mut worst = 0.0f64;
        let mut out = [Complex64::new(0.0, 0.0)];
        while s.t() < 3.0 {
            s.step(&mut f, 3.0).unwrap();
            let mid = 0.5 * (s.t() + s.t_prev());
            s.interpolate(mid, &mut out);
            worst = worst.max((out[0] - (lam * mid).exp()).norm());
        }
        assert_eq!(s.t(), 3.0);
        assert!((s.y()[0] - (lam * 3.0).exp()).norm() < 1e-8);
        assert!(worst < 1e-7, "dense output error {worst}");
    }
}
