use serde::{Deserialize, Serialize};

use crate::marginals::MarginalPosterior;
use crate::stats::average_ranks;

/// Entries of pseudo-data are clamped into `[EPS, 1 - EPS]`.
pub const EPS: f64 = 1e-10;

/// `n x 2` matrix of probability-integral transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoData {
    rows: Vec<[f64; 2]>,
}

impl PseudoData {
    pub fn new(rows: Vec<[f64; 2]>) -> Self {
        let rows = rows.into_iter().map(|[a, b]| [a.clamp(EPS, 1.0 - EPS), b.clamp(EPS, 1.0 - EPS)]).collect();
        PseudoData { rows }
    }

    /// Pseudo-data under one draw from each marginal posterior.
    pub fn from_marginals(
        x1: &[f64],
        x2: &[f64],
        m1: &MarginalPosterior,
        s1: usize,
        m2: &MarginalPosterior,
        s2: usize,
    ) -> Self {
        let f1 = m1.family_at(s1);
        let f2 = m2.family_at(s2);
        let rows = x1
            .iter()
            .zip(x2)
            .map(|(&a, &b)| [f1.cdf_unchecked(a + m1.data_shift), f2.cdf_unchecked(b + m2.data_shift)])
            .collect();
        PseudoData::new(rows)
    }

    /// Rank-based pseudo-data `rank / (n + 1)`.
    pub fn from_ranks(x1: &[f64], x2: &[f64]) -> Self {
        let n = x1.len() as f64;
        let r1 = average_ranks(x1);
        let r2 = average_ranks(x2);
        PseudoData::new(r1.iter().zip(&r2).map(|(a, b)| [a / (n + 1.0), b / (n + 1.0)]).collect())
    }

    pub fn rows(&self) -> &[[f64; 2]] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Copula functional targeted by a moment condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Functional {
    SpearmanRho,
    /// Joint exceedance above threshold `t`.
    UpperTail(f64),
    /// Joint exceedance below threshold `t`.
    LowerTail(f64),
}

impl Functional {
    pub fn name(&self) -> &'static str {
        match self {
            Functional::SpearmanRho => "spearman_rho",
            Functional::UpperTail(_) => "lambda_upper",
            Functional::LowerTail(_) => "lambda_lower",
        }
    }

    /// Support of the functional, which is also the uniform prior range.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Functional::SpearmanRho => (-1.0, 1.0),
            _ => (0.0, 1.0),
        }
    }
}

/// Moment function `h(u, psi)` with `E h = 0` at the true functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCondition {
    pub functional: Functional,
}

/// Build the moment condition for a functional. `t` is only used by the
/// tail functionals.
pub fn moment_for(functional: Functional) -> MomentCondition {
    MomentCondition { functional }
}

impl MomentCondition {
    /// `h` without the `- psi` term.
    #[inline]
    pub fn statistic(&self, u: [f64; 2]) -> f64 {
        match self.functional {
            Functional::SpearmanRho => 12.0 * u[0] * u[1] - 3.0,
            Functional::UpperTail(t) => {
                if u[0] > t && u[1] > t {
                    1.0 / (1.0 - t)
                } else {
                    0.0
                }
            }
            Functional::LowerTail(t) => {
                if u[0] <= t && u[1] <= t {
                    1.0 / t
                } else {
                    0.0
                }
            }
        }
    }

    #[inline]
    pub fn h(&self, u: [f64; 2], psi: f64) -> f64 {
        self.statistic(u) - psi
    }

    /// Method-of-moments value of the functional on `u`.
    pub fn plug_in(&self, u: &PseudoData) -> f64 {
        u.rows().iter().map(|&r| self.statistic(r)).sum::<f64>() / u.len() as f64
    }

    pub fn evaluate(&self, u: &PseudoData, psi: f64) -> Vec<f64> {
        u.rows().iter().map(|&r| self.h(r, psi)).collect()
    }
}
