//! System parameters and the truncated cavity ⊗ emitters Hilbert space.
//!
//! Basis index = photons · 2^N + pattern, where bit `i` of `pattern` is set
//! when emitter `i` is excited.

use std::fmt;

use crate::error::{Error, Result};

/// Budget on D² (entries of a vectorized density matrix).
pub const DEFAULT_VEC_BUDGET: usize = 1 << 22;

/// Rates are in units of the coupling; `omega` is kept for bookkeeping only
/// since all matrices live in the frame rotating at the common frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub n_emitters: usize,
    pub coupling_g: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub pump_px: f64,
    pub dephasing: f64,
    pub omega: f64,
}

impl SystemParams {
    /// g = 1, all rates zero.
    pub fn new(n_emitters: usize) -> Self {
        Self {
            n_emitters,
            coupling_g: 1.0,
            kappa: 0.0,
            gamma: 0.0,
            pump_px: 0.0,
            dephasing: 0.0,
            omega: 0.0,
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
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

    pub fn with_coupling(mut self, g: f64) -> Self {
        self.coupling_g = g;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_emitters < 1 {
            return Err(Error::InvalidParameter {
                key: "n_emitters",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.coupling_g.is_finite() && self.coupling_g > 0.0) {
            return Err(Error::InvalidParameter {
                key: "coupling_g",
                reason: format!("must be positive, got {}", self.coupling_g),
            });
        }
        for (key, v) in [
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("pump_px", self.pump_px),
            ("dephasing", self.dephasing),
        ] {
            check_rate(key, v)?;
        }
        Ok(())
    }
}

pub(crate) fn check_rate(key: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            key,
            reason: format!("rate must be finite and nonnegative, got {v}"),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EmitterBasis {
    /// Product states of individual emitters.
    Uncoupled,
    /// Total-angular-momentum states |J, M; i⟩.
    Coupled,
}

/// Identifies the space an operator acts on. Operations across differing
/// tags are rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceTag {
    pub n_max: usize,
    pub n_emitters: usize,
    pub basis: EmitterBasis,
}

impl SpaceTag {
    pub fn dim(&self) -> usize {
        (self.n_max + 1) << self.n_emitters
    }

    pub(crate) fn ensure_eq(&self, other: &SpaceTag) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                left: *self,
                right: *other,
            })
        }
    }
}

impl fmt::Display for SpaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let basis = match self.basis {
            EmitterBasis::Uncoupled => "uncoupled",
            EmitterBasis::Coupled => "coupled",
        };
        write!(
            f,
            "[N={}, n_max={}, {basis}, dim={}]",
            self.n_emitters,
            self.n_max,
            self.dim()
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub photons: usize,
    pub pattern: u64,
}

impl BasisState {
    pub fn is_excited(&self, emitter: usize) -> bool {
        self.pattern >> emitter & 1 == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CompositeSpace {
    tag: SpaceTag,
}

impl CompositeSpace {
    pub fn n_max(&self) -> usize {
        self.tag.n_max
    }

    pub fn n_emitters(&self) -> usize {
        self.tag.n_emitters
    }

    pub fn dim(&self) -> usize {
        self.tag.dim()
    }

    pub fn emitter_dim(&self) -> usize {
        1 << self.tag.n_emitters
    }

    pub fn tag(&self) -> SpaceTag {
        self.tag
    }

    pub fn index(&self, state: BasisState) -> usize {
        debug_assert!(state.photons <= self.tag.n_max);
        debug_assert!(state.pattern < self.emitter_dim() as u64);
        state.photons * self.emitter_dim() + state.pattern as usize
    }

    pub fn decode(&self, index: usize) -> BasisState {
        debug_assert!(index < self.dim());
        BasisState {
            photons: index / self.emitter_dim(),
            pattern: (index % self.emitter_dim()) as u64,
        }
    }
}

pub fn build_space(n_emitters: usize, n_max: usize) -> Result<CompositeSpace> {
    build_space_with_budget(n_emitters, n_max, DEFAULT_VEC_BUDGET)
}

/// As [`build_space`] with an explicit cap on D².
pub fn build_space_with_budget(
    n_emitters: usize,
    n_max: usize,
    budget: usize,
) -> Result<CompositeSpace> {
    if n_emitters < 1 {
        return Err(Error::InvalidParameter {
            key: "n_emitters",
            reason: "must be at least 1".into(),
        });
    }
    let too_large = |dim: usize| Error::SpaceTooLarge {
        n_emitters,
        n_max,
        dim,
        budget,
    };
    if n_emitters >= 32 {
        return Err(too_large(usize::MAX));
    }
    let dim = (n_max + 1)
        .checked_mul(1 << n_emitters)
        .ok_or_else(|| too_large(usize::MAX))?;
    match dim.checked_mul(dim) {
        Some(d2) if d2 <= budget => {}
        _ => return Err(too_large(dim)),
    }
    Ok(CompositeSpace {
        tag: SpaceTag {
            n_max,
            n_emitters,
            basis: EmitterBasis::Uncoupled,
        },
    })
}

/// Emitters-only space (no cavity levels), as used by the reduced model.
pub fn emitter_space(n_emitters: usize) -> Result<CompositeSpace> {
    build_space(n_emitters, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(build_space(2, 3).unwrap().dim(), 16);
        assert_eq!(build_space(1, 0).unwrap().dim(), 2);
    }

    #[test]
    fn round_trip_n5() {
        let s = build_space(5, 15).unwrap();
        assert_eq!(s.dim(), 512);
        for i in 0..s.dim() {
            assert_eq!(s.index(s.decode(i)), i);
        }
        let st = s.decode(3 * 32 + 5);
        assert_eq!(st.photons, 3);
        assert!(st.is_excited(0) && !st.is_excited(1) && st.is_excited(2));
    }

    #[test]
    fn cap_names_dimensions() {
        let err = build_space(11, 1).unwrap_err();
        match err {
            Error::SpaceTooLarge {
                n_emitters, dim, ..
            } => {
                assert_eq!(n_emitters, 11);
                assert_eq!(dim, 4096);
            }
            e => panic!("unexpected {e}"),
        }
        assert!(build_space_with_budget(2, 3, 255).is_err());
        assert!(build_space_with_budget(2, 3, 256).is_ok());
    }

    #[test]
    fn negative_rate_names_key() {
        let p = SystemParams::new(2).with_gamma(-1.0);
        match p.validate().unwrap_err() {
            Error::InvalidParameter { key, .. } => assert_eq!(key, "gamma"),
            e => panic!("unexpected {e}"),
        }
    }
}
