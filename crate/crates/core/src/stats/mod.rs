//! Gaussian fitting, Kullback-Leibler divergence and correlation tests.

mod correlation;
mod divergence;
mod gaussian;
pub mod linalg;
pub mod special;

use thiserror::Error;

pub use correlation::{category_average, format_p_value, pearson, CorrelationResult};
pub use divergence::{kld_gaussian, symmetric_kld, KldResult};
pub use gaussian::{fit_gaussian, Covariance, CovarianceMode, FitOptions, GaussianSummary, ModePolicy};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("non-finite input value")]
    NonFinite,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("covariance is ill-conditioned even after regularization")]
    IllConditioned,
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("correlation undefined: zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("no defined values for category {0}")]
    EmptyCategory(String),
}

pub type Result<T> = std::result::Result<T, StatsError>;
