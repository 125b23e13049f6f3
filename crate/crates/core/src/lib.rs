//! Monte Carlo laboratory for biased random walks on supercritical
//! Galton-Watson trees conditioned to survive.
//!
//! The crate simulates the walk with parent weight `lambda` against weight 1
//! per child, cuts trajectories into i.i.d. regeneration blocks, and turns the
//! blocks into estimates of the speed, the block covariance matrix, and the
//! derivative of the speed in the bias, cross-checked against effective
//! conductance recursions and closed-form oracle trees.

pub mod conductance;
pub mod driver;
pub mod error;
pub mod estimators;
pub mod offspring;
pub mod regen;
pub mod rng;
pub mod stats;
pub mod tree;
pub mod walk;

pub use error::{Error, Result};
pub use estimators::EstimateReport;
pub use offspring::OffspringLaw;
pub use regen::{BlockSet, RegenBlock};
pub use rng::SeedTree;
pub use stats::Estimate;
pub use tree::{SimMode, TreeArena, VertexId, VertexKind};
pub use walk::{WalkConfig, Walker};
