//! Simulator for N two-level emitters coupled to one lossy cavity mode under
//! incoherent pumping, decay and dephasing.
//!
//! Steady states come from a direct sparse solve of the Lindblad generator
//! ([`liouville`]) or from quantum trajectories ([`mcwf`]). With a fast cavity
//! the mode can be eliminated in favour of a collective emitter decay
//! ([`collective`]).

pub mod collective;
pub mod dense;
mod error;
pub mod liouville;
pub mod mcwf;
pub mod observables;
pub mod ode;
pub mod operators;
pub mod space;
pub mod sparse;

pub use error::{Error, Result};
