//! Evaluation of elliptic hypergeometric integrals and numerical verification
//! of the identities they satisfy.

pub mod error;
pub mod identities;
pub mod integrals;
pub mod matrixkit;
pub mod quadrature;
pub mod report;
pub mod sampler;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
