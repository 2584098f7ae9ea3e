//! Weighted discrete Hardy constants on rooted trees, cube tree-coverings of
//! Hölder cusp domains, and constant-orthogonal decompositions built on them.

// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod applications;
pub mod covering;
pub mod decomp;
pub mod hardy;
pub mod random;
pub mod tree;

pub use hardy::{HardyError, HardyProblem, HardyReport};
pub use tree::{Antichain, RootedTree, TreeError};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
