//! Quadrature checkers for the weighted Poincaré, fractional Poincaré and
//! Korn inequalities on a covered cusp domain, and the density splitting of
//! dual functionals.

mod density;
mod domain;
mod functions;
mod ratio;

pub use density::{density_split, sample_on_covering, DensitySplit};
pub use domain::{CoveredDomain, Domain, Stratum};
pub use functions::TestFunction;
pub use ratio::{
    inequality_ratio, parameter_sweep, sweep_csv, InequalityKind, InequalityParams, RatioReport, SweepTable,
    LOW_CONFIDENCE_SPREAD,
};

use thiserror::Error;

use crate::decomp::DecompError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApplicationError {
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("epsilon = {epsilon:e} needs more levels than the covering has (smallest tail {smallest_tail:e})")]
    EpsilonTooSmall { epsilon: f64, smallest_tail: f64 },
    #[error(transparent)]
    Decomp(#[from] DecompError),
}
