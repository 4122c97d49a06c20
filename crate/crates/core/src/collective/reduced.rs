//! Emitters-only model with the cavity adiabatically eliminated into a
//! collective decay channel J₋ at rate Γ = 4g²/κ.

use super::basis::{coupled_basis, coupled_tag};
use crate::error::{Error, Result};
use crate::liouville::{lindblad, Superoperator};
use crate::operators::{collective_op, emitter_op, CollectiveOp, EmitterOp, SparseOperator};
use crate::space::{check_rate, emitter_space, EmitterBasis, SystemParams};

/// Elimination is trusted when κ ≥ this factor times NΓ.
pub const VALIDITY_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedParams {
    pub n_emitters: usize,
    /// Γ, the collective decay rate.
    pub collective_rate: f64,
    pub gamma: f64,
    pub pump_px: f64,
    pub dephasing: f64,
    /// Set when derived from cavity parameters: whether κ ≥ 10 NΓ.
    pub adiabatic_valid: Option<bool>,
}

impl ReducedParams {
    pub fn new(n_emitters: usize, collective_rate: f64) -> Self {
        Self {
            n_emitters,
            collective_rate,
            gamma: 0.0,
            pump_px: 0.0,
            dephasing: 0.0,
            adiabatic_valid: None,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_pump(mut self, pump_px: f64) -> Self {
        self.pump_px = pump_px;
        self
    }

    pub fn with_dephasing(mut self, dephasing: f64) -> Self {
        self.dephasing = dephasing;
        self
    }

    /// Γ = 4g²/κ. Logs a warning outside the validity domain.
    pub fn from_system(p: &SystemParams) -> Result<Self> {
        p.validate()?;
        if p.kappa <= 0.0 {
            return Err(Error::InvalidParameter {
                key: "kappa",
                reason: "adiabatic elimination needs a positive cavity decay".into(),
            });
        }
        let gamma_c = 4.0 * p.coupling_g * p.coupling_g / p.kappa;
        let valid = p.kappa >= VALIDITY_FACTOR * p.n_emitters as f64 * gamma_c;
        if !valid {
            log::warn!(
                "adiabatic elimination outside its validity domain: kappa = {} < {} N Gamma = {}",
                p.kappa,
                VALIDITY_FACTOR,
                VALIDITY_FACTOR * p.n_emitters as f64 * gamma_c
            );
        }
        Ok(Self {
            n_emitters: p.n_emitters,
            collective_rate: gamma_c,
            gamma: p.gamma,
            pump_px: p.pump_px,
            dephasing: p.dephasing,
            adiabatic_valid: Some(valid),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_emitters < 1 {
            return Err(Error::InvalidParameter {
                key: "n_emitters",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.collective_rate.is_finite() && self.collective_rate > 0.0) {
            return Err(Error::InvalidParameter {
                key: "collective_rate",
                reason: format!("must be positive, got {}", self.collective_rate),
            });
        }
        check_rate("gamma", self.gamma)?;
        check_rate("pump_px", self.pump_px)?;
        check_rate("dephasing", self.dephasing)
    }
}

/// Collapse operators of the reduced model on the uncoupled emitter space:
/// J₋ (Γ), then per emitter σ₋ (γ), σ₊ (P_x), σ_z (γ*/2). Zero rates omitted.
pub fn reduced_jump_channels(rp: &ReducedParams) -> Result<Vec<(String, SparseOperator, f64)>> {
    rp.validate()?;
    let space = emitter_space(rp.n_emitters)?;
    let mut out = vec![(
        "collective".to_string(),
        collective_op(&space, CollectiveOp::JMinus),
        rp.collective_rate,
    )];
    for i in 0..rp.n_emitters {
        for (name, kind, rate) in [
            ("decay", EmitterOp::Lower, rp.gamma),
            ("pump", EmitterOp::Raise, rp.pump_px),
            ("dephase", EmitterOp::Z, 0.5 * rp.dephasing),
        ] {
            if rate > 0.0 {
                out.push((format!("{name}_{i}"), emitter_op(&space, i, kind)?, rate));
            }
        }
    }
    Ok(out)
}

pub fn build_reduced_liouvillian(rp: &ReducedParams, basis: EmitterBasis) -> Result<Superoperator> {
    let channels = reduced_jump_channels(rp)?;
    match basis {
        EmitterBasis::Uncoupled => {
            let tag = channels[0].1.tag();
            let list: Vec<(SparseOperator, f64)> =
                channels.into_iter().map(|(_, c, r)| (c, r)).collect();
            lindblad(&SparseOperator::zero(tag), &list)
        }
        EmitterBasis::Coupled => {
            let b = coupled_basis(rp.n_emitters)?;
            let list = channels
                .into_iter()
                .map(|(_, c, r)| Ok((b.operator_to_coupled(&c)?, r)))
                .collect::<Result<Vec<_>>>()?;
            lindblad(&SparseOperator::zero(coupled_tag(rp.n_emitters)), &list)
        }
    }
}

/// Rotates an uncoupled-basis operator into the coupled basis; exposed for
/// building observables on coupled-basis states.
pub fn to_coupled_operator(op: &SparseOperator) -> Result<SparseOperator> {
    coupled_basis(op.tag().n_emitters)?.operator_to_coupled(op)
}
