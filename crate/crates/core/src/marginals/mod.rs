//! Parametric marginals for income and net wealth.

mod criteria;
mod family;
mod mcmc;

pub use criteria::{information_criteria, InformationCriteria, SelectionRow, SelectionTable};
pub use family::{FamilyTag, MarginalFamily, ParamKind};
pub use mcmc::{log_likelihood, rwmh_fit, ChainConfig, MarginalPosterior, PriorSpec};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarginalError {
    #[error("parameter {param} = {value} is outside its domain")]
    Domain { param: &'static str, value: f64 },
    #[error("density undefined at the atom; atom mass is {mass}")]
    AtomMass { mass: f64 },
    #[error("need at least {min} observations, got {n}")]
    TooFewObservations { n: usize, min: usize },
    #[error("data contain non-finite values")]
    NonFiniteData,
    #[error("data have zero variance")]
    DegenerateData,
    #[error("value {value} is outside the support of {family}")]
    OutsideSupport { family: FamilyTag, value: f64 },
    #[error("{family}: no proposal accepted for {sweeps} consecutive sweeps")]
    AdaptationFailure { family: FamilyTag, sweeps: usize },
    #[error("invalid chain configuration (iterations must exceed burn-in, thin > 0)")]
    InvalidChain,
}

/// Candidate families for each margin.
pub const INCOME_FAMILIES: [FamilyTag; 2] = [FamilyTag::SinghMaddala, FamilyTag::Dagum];
pub const WEALTH_FAMILIES: [FamilyTag; 2] = [FamilyTag::ShiftedLogNormal, FamilyTag::NegPosMixture];
