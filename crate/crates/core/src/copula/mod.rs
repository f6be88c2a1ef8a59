//! Semiparametric inference on copula functionals (Spearman's rho and tail
//! dependence) via exponentially tilted empirical likelihood.

mod abscop;
mod etel;
mod moments;

pub use abscop::{abscop_sample, weighted_posterior, DependencePosterior, DependenceSummary};
pub use etel::{etel_dual, etel_loglik, etel_weights, EtelSolution, ETA_BOUND};
pub use moments::{moment_for, Functional, MomentCondition, PseudoData, EPS};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CopulaError {
    #[error("marginal posterior has no draws")]
    EmptyMarginal,
    #[error("income and wealth samples differ in length ({a} vs {b}) or are empty")]
    LengthMismatch { a: usize, b: usize },
    #[error("at least 1000 proposals required, got {b}")]
    TooFewProposals { b: usize },
    #[error("every proposal has zero ETEL likelihood")]
    NoSupport,
}
