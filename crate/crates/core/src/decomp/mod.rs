//! Constant-orthogonal decomposition of mean-zero functions along a tree
//! covering, and the pairwise splitting used to glue patches.
//!
//! Functions are piecewise constant on fragments (core cells minus the
//! connectors, and the connectors themselves), so every integral in the
//! construction is a finite sum and the exact properties can be checked
//! exactly.

mod construct;
mod partition;
mod split;

pub use construct::{
    bound_constants, decompose, verify_decomposition, BoundConstants, DecompositionReport,
    DecompositionResult, Part, MEAN_TOL, PART_MEAN_TOL, SUM_TOL,
};
pub use partition::{CellFunction, Fragment, TreePartition};
pub use split::{check_split, split_chain, split_norm_ratio, split_pair, Scalar, SplitCheck, SplitPair};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecompError {
    #[error("function does not have zero mean: ∫g = {integral:e} with ‖g‖₁ = {l1:e}")]
    NotMeanZero { integral: f64, l1: f64 },
    #[error("function does not have zero mean on A ∪ B")]
    NotMeanZeroScalar,
    #[error("A ∩ B has zero measure")]
    ZeroOverlap,
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}
