//! Bayesian additive regression trees: continuous and probit outcomes.

mod encode;
mod sampler;
mod tree;

pub use encode::CovariateEncoder;
pub use sampler::{fit_probit, fit_regression, BartSettings, Ensemble, EnsembleKind};
pub use tree::{Node, Tree};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BartError {
    #[error("need at least {min} observations, got {n}")]
    TooFew { n: usize, min: usize },
    #[error("outcome is constant")]
    Degenerate,
    #[error("binary outcome has a single class")]
    SingleClass,
    #[error("covariate rows ({0}) and outcomes ({1}) differ in length")]
    LengthMismatch(usize, usize),
    #[error("expected {expected} covariates, got {got}")]
    FeatureMismatch { expected: usize, got: usize },
    #[error("non-finite covariate or outcome")]
    NonFinite,
}

impl From<&crate::config::BartConfig> for BartSettings {
    fn from(c: &crate::config::BartConfig) -> Self {
        BartSettings { trees: c.trees, iterations: c.iterations, burn_in: c.burn_in, ..Default::default() }
    }
}
