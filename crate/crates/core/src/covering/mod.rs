//! Level-by-level cube tree covering of the model cusp domain
//! `Ω_φ = {(x', x_n) : x' ∈ (-ℓ/2, ℓ/2)^{n-1}, 0 < x_n < φ(x')}`.
//!
//! Each cube `Q_t` is enlarged downward by half of itself to `U_t`; the
//! added slab `B_t` lies inside the parent cube. The root keeps `U_a = Q_a`
//! since the slab below it would leave the domain.

mod build;
mod counting;
mod export;
mod profile;
mod weights;

pub use build::{build_covering, Cube, CubeCovering};
pub use counting::{
    admissibility_range, counting_profiles, fit_constants, shadow_volumes, verify_counting_bounds,
    verify_geometry, CountingProfile, CountingReport, FittedConstants, GeometryReport,
};
pub use export::{covering_json, level_csv, CoveringJson, CubeJson};
pub use profile::{Decision, HolderProfile, ProfileKind};
pub use weights::{tail_integrability, weights_from_beta, TailProfile, WeightSpec, WeightedProblem};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoveringError {
    #[error("dimension n = {0} is not supported (use 2 or 3)")]
    Dimension(usize),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("cube cap {0} exceeded")]
    CubeCap(usize),
    #[error("depth {0} exceeds the coordinate range")]
    DepthTooLarge(u32),
    #[error("vertex {0} is not a non-root cube")]
    InvalidVertex(usize),
}
