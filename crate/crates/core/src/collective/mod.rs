//! Coupled (J, M) basis, the cavity-eliminated emitter model and closed-form
//! reference results.

mod analytic;
mod basis;
mod reduced;

use std::borrow::Cow;

pub use analytic::{
    analytic_g2_three, analytic_g2_two, analytic_n3_populations, independent_emitter_g2,
    independent_g2_tau, EmitterStatistics, SeriesOrder, ThreeEmitterForm,
    ThreeEmitterPopulations, SERIES_VALIDITY,
};
pub use basis::{
    admissible_j, coupled_basis, coupled_tag, degeneracy, CoupledBasis, CoupledState, HalfInt,
    MAX_COUPLED_EMITTERS,
};
pub use reduced::{
    build_reduced_liouvillian, reduced_jump_channels, to_coupled_operator, ReducedParams,
    VALIDITY_FACTOR,
};

use crate::error::{Error, Result};
use crate::liouville::DensityMatrix;
use crate::space::EmitterBasis;

/// Returns the state in the uncoupled basis, borrowing when it already is.
pub fn to_uncoupled(rho: &DensityMatrix) -> Result<Cow<'_, DensityMatrix>> {
    let tag = rho.tag();
    match tag.basis {
        EmitterBasis::Uncoupled => Ok(Cow::Borrowed(rho)),
        EmitterBasis::Coupled => {
            if tag.n_max != 0 {
                return Err(Error::InvalidState {
                    detail: "coupled-basis states must have no cavity mode".into(),
                });
            }
            Ok(Cow::Owned(
                coupled_basis(tag.n_emitters)?.state_to_uncoupled(rho)?,
            ))
        }
    }
}
