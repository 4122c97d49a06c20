//! Closed-form results for the reduced model and for independent emitters.
//!
//! `x` below always denotes P_x / Γ.

use num_complex::Complex64;

/// Above this P_x/Γ the perturbative expressions are flagged.
pub const SERIES_VALIDITY: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesOrder {
    /// (4/9) Γ/P_x only.
    Leading,
    /// Leading term plus the next two orders.
    Series,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThreeEmitterForm {
    /// The rounded four-term expansion.
    Series,
    /// The exact rational function behind that expansion.
    ClosedForm,
}

fn ratio(gamma_c: f64, px: f64) -> f64 {
    let x = px / gamma_c;
    if x > SERIES_VALIDITY {
        log::warn!("P_x/Gamma = {x} is outside the small-pump expansion");
    }
    x
}

/// g²(0) of two emitters in the weak-pump expansion.
pub fn analytic_g2_two(gamma_c: f64, px: f64, order: SeriesOrder) -> f64 {
    let x = ratio(gamma_c, px);
    let leading = 4.0 / 9.0 / x;
    match order {
        SeriesOrder::Leading => leading,
        SeriesOrder::Series => leading + 13.0 / 27.0 - 2.0 / 27.0 * x,
    }
}

/// g²(0) of three emitters.
pub fn analytic_g2_three(gamma_c: f64, px: f64, form: ThreeEmitterForm) -> f64 {
    let x = ratio(gamma_c, px);
    match form {
        ThreeEmitterForm::Series => {
            14.0 / 75.0 / x + 2.067 - 3.501 * x + 9.18 * x * x - 23.4 * x * x * x
        }
        ThreeEmitterForm::ClosedForm => {
            let p = 6.0 * x.powi(3) + 47.0 * x * x + 81.0 * x + 6.0;
            let q = 6.0 * x.powi(4) + 47.0 * x.powi(3) + 201.0 * x * x + 306.0 * x + 84.0;
            let r = 6.0 * x.powi(3) + 53.0 * x * x + 182.0 * x + 60.0;
            4.0 * p * q / (3.0 * x * r * r)
        }
    }
}

/// Diagonal coupled-basis populations of the three-emitter steady state,
/// relative to the ground state |3/2, −3/2⟩. The J = 1/2 values are per copy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeEmitterPopulations {
    /// ρ_{3/2,−3/2} itself, fixed by the trace.
    pub ground: f64,
    pub r_32_m12: f64,
    pub r_32_p12: f64,
    pub r_32_p32: f64,
    pub r_12_p12: f64,
    pub r_12_m12: f64,
}

impl ThreeEmitterPopulations {
    /// Tr ρ with both J = 1/2 copies counted.
    pub fn trace(&self) -> f64 {
        self.ground
            * (1.0
                + self.r_32_m12
                + self.r_32_p12
                + self.r_32_p32
                + 2.0 * (self.r_12_p12 + self.r_12_m12))
    }

    /// g²(0) from the populations: 12(ρ₃₃ + ρ₃₁) / (3ρ₃₃ + 4ρ₃₁ + 3ρ₃ₘ + ρ₁₁;₁ + ρ₁₁;₂)².
    pub fn g2(&self) -> f64 {
        let p33 = self.ground * self.r_32_p32;
        let p31 = self.ground * self.r_32_p12;
        let p3m = self.ground * self.r_32_m12;
        let p11 = self.ground * self.r_12_p12;
        let den = 3.0 * p33 + 4.0 * p31 + 3.0 * p3m + 2.0 * p11;
        12.0 * (p33 + p31) / (den * den)
    }
}

pub fn analytic_n3_populations(gamma_c: f64, px: f64) -> ThreeEmitterPopulations {
    let x = ratio(gamma_c, px);
    let s = 1.0 + 6.0 * x;
    ThreeEmitterPopulations {
        ground: 12.0 * s
            / (84.0 + 306.0 * x + 201.0 * x * x + 47.0 * x.powi(3) + 6.0 * x.powi(4)),
        r_32_m12: x,
        r_32_p12: x * (x + 2.0) / 4.0,
        r_32_p32: x * x * (42.0 + 29.0 * x + 6.0 * x * x) / (12.0 * s),
        r_12_p12: x * (2.0 * x + 5.0) / s,
        r_12_m12: (4.0 * x + 3.0) / s,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmitterStatistics {
    /// Independent quantum emitters with full first-order coherence.
    Quantum,
    /// Independent emitters whose mutual phase is averaged out.
    Dephased,
    /// Upper bound from classical fields.
    ClassicalBound,
}

pub fn independent_emitter_g2(n: usize, model: EmitterStatistics) -> f64 {
    let inv = 1.0 / n as f64;
    match model {
        EmitterStatistics::Quantum => 2.0 * (1.0 - inv),
        EmitterStatistics::Dephased => 1.0 - inv,
        EmitterStatistics::ClassicalBound => 2.0 - inv,
    }
}

/// g²(τ) of uncorrelated emitters from per-emitter intensities and first-
/// and second-order correlations at the same τ.
///
/// # Panics
/// If the slices differ in length or are empty.
pub fn independent_g2_tau(intensities: &[f64], g1: &[Complex64], g2: &[f64]) -> f64 {
    assert!(!intensities.is_empty());
    assert_eq!(intensities.len(), g1.len());
    assert_eq!(intensities.len(), g2.len());
    let total: f64 = intensities.iter().sum();
    let mut num = 0.0;
    for (i, &ii) in intensities.iter().enumerate() {
        num += g2[i] * ii * ii;
        for (k, &ik) in intensities.iter().enumerate() {
            if k != i {
                num += ii * ik * (1.0 + (g1[i].conj() * g1[k]).re);
            }
        }
    }
    num / (total * total)
}
