//! Horseshoe Bayesian VAR, recursive identification and impulse responses.

mod gibbs;
mod irf;
mod pca;

pub use gibbs::{design_matrices, gibbs_fit, gibbs_fit_matrix, simulate_var, BvarChain, BvarPrior, VarDraws, VarSpec};
pub use irf::{companion, impulse_response, irf, spectral_radius, IrfSet, Shock, EXPLOSIVE_MODULUS};
pub use pca::{pca_spread, SpreadFactor};

use thiserror::Error;

/// Recursive ordering: slow real and price variables first, policy last.
pub const DEFAULT_ORDERING: [&str; 9] = ["GDP", "HICP", "LCOMP", "UNEMP", "HP", "DJ50", "LT-IR", "EA-spread", "ST-IR"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BvarError {
    #[error("series `{0}` missing from the macro panel")]
    MissingSeries(String),
    #[error("sample too short: T = {t} but need T > K + 10 = {need}")]
    TooShort { t: usize, need: usize },
    #[error("covariance draw not positive definite after {attempts} jittered retries")]
    NotSpd { attempts: usize },
    #[error("coefficient posterior precision is not positive definite")]
    SingularPrecision,
    #[error("need at least 2 spread series, got {0}")]
    TooFewSeries(usize),
    #[error("series lengths differ")]
    LengthMismatch,
    #[error("spreads are constant; covariance is zero")]
    ConstantSpreads,
    #[error("shocked variable `{0}` not in the ordering")]
    UnknownShock(String),
    #[error("requested VAR is not stable (companion spectral radius {0:.4})")]
    Unstable(f64),
    #[error("every draw is explosive; no IRF bands available")]
    AllExplosive,
    #[error("non-finite values in input")]
    NonFinite,
}
