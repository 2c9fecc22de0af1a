use thiserror::Error;

use crate::quadrature::QuadResult;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("non-convergent product: |base| = {0} is not below 1")]
    NonConvergent(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("truncation cap of {0} terms reached before the cutoff")]
    TruncationCapHit(usize),

    #[error("argument within pole-proximity guard: {0}")]
    PoleProximity(String),

    #[error("tie between parameters {0} and {1} (coefficient pole)")]
    TieBreak(usize, usize),

    #[error("quadrature did not converge: err_est {:e} after {} nodes", .0.err_est, .0.nodes_used)]
    NotConverged(QuadResult),

    #[error("contour invalid: {0}")]
    ContourInvalid(String),

    #[error("dimension {0} exceeds the supported cap")]
    CapExceeded(usize),

    #[error("balancing violated: relative residual {0:e}")]
    BalancingViolated(f64),

    #[error("left-kernel condition violated: residual {0:e}")]
    KernelViolated(f64),

    #[error("sampler infeasible: {0}")]
    SamplerInfeasible(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
