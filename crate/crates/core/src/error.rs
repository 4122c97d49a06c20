use thiserror::Error;

use crate::space::SpaceTag;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },

    #[error(
        "space too large: {n_emitters} emitters with n_max={n_max} gives dim {dim}, \
         {dim}^2 exceeds the budget of {budget} vectorized entries"
    )]
    SpaceTooLarge {
        n_emitters: usize,
        n_max: usize,
        dim: usize,
        budget: usize,
    },

    #[error("space mismatch: {left} vs {right}")]
    SpaceMismatch { left: SpaceTag, right: SpaceTag },

    #[error("emitter index {index} out of range for {n_emitters} emitters")]
    EmitterIndex { index: usize, n_emitters: usize },

    #[error("non-unique steady state: {detail}")]
    NonUniqueSteadyState { detail: String },

    #[error("no convergence: {detail}")]
    NoConvergence { detail: String },

    #[error("positivity violated: minimum eigenvalue {min_eigenvalue:e}")]
    PositivityViolation { min_eigenvalue: f64 },

    #[error("invalid density matrix: {detail}")]
    InvalidState { detail: String },

    #[error("step size underflow at t = {time}")]
    StepSizeUnderflow { time: f64 },

    #[error("cutoff not converged at n_max = {n_max}: last values {last:?}, previous {previous:?}")]
    CutoffNotConverged {
        n_max: usize,
        last: Vec<f64>,
        previous: Vec<f64>,
    },

    #[error("zero intensity: {intensity:e} is below the floor")]
    ZeroIntensity { intensity: f64 },

    #[error("emitter site asymmetry {spread:e} exceeds tolerance")]
    SiteAsymmetry { spread: f64 },

    #[error("insufficient samples for `{observable}`: {effective} < {required}")]
    InsufficientSamples {
        observable: String,
        effective: usize,
        required: usize,
    },

    #[error("J = {twice_j}/2 is not admissible for N = {n}")]
    InadmissibleJ { n: usize, twice_j: i64 },

    #[error("coupled basis for N = {n} exceeds the cap of {cap}")]
    BasisTooLarge { n: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
