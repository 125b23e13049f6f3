//! Error type shared by the simulation modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A probability table failed validation (names the offending key).
    #[error("invalid offspring law: {0}")]
    InvalidLaw(String),

    /// An argument left its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter left the regime where the requested quantity exists.
    #[error("regime error: {0}")]
    Regime(String),

    /// Materialized-vertex cap exceeded (runtime guard).
    #[error("memory guard: materialized vertices would exceed cap of {cap}")]
    MemoryCap { cap: usize },

    /// Non-backtracking rejection sampler gave up (runtime guard).
    #[error("rejection guard: {rejections} consecutive rejected episodes (lambda too close to the regime boundary?)")]
    RejectionCap { rejections: u64 },

    /// Iterative scheme failed to converge (runtime guard).
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Too few regeneration blocks for the requested estimate.
    #[error("insufficient blocks: have {have}, need {need}")]
    InsufficientBlocks { have: usize, need: usize },

    /// A Girsanov perturbation was queried without being registered up front.
    #[error("perturbation h={0} was not registered before the walk started")]
    UnregisteredPerturbation(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
