//! Prior-proposal / ETEL-weighting sampler for copula functionals.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::etel::etel_loglik;
use super::moments::{Functional, MomentCondition, PseudoData};
use super::CopulaError;
use crate::marginals::MarginalPosterior;
use crate::rng::{derive_indexed, derive_seed, rng_from_seed};
use crate::stats::weighted_quantile;

/// Posterior sample of one copula functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencePosterior {
    pub functional: Functional,
    /// Prior proposals, in proposal order.
    pub proposals: Vec<f64>,
    /// Unnormalized ETEL log-weights aligned with `proposals`.
    pub log_weights: Vec<f64>,
    /// Resampled draws (with replacement, proportional to weight).
    pub draws: Vec<f64>,
    pub median: f64,
    pub lo68: f64,
    pub hi68: f64,
    /// Kish effective sample size of the normalized weights.
    pub ess: f64,
    /// Set when `ess < B / 100`.
    pub low_ess: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceSummary {
    pub median: f64,
    pub lo68: f64,
    pub hi68: f64,
    pub ess: f64,
}

impl DependencePosterior {
    pub fn summary(&self) -> DependenceSummary {
        DependenceSummary { median: self.median, lo68: self.lo68, hi68: self.hi68, ess: self.ess }
    }

    pub fn write_draws_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([self.functional.name()])?;
        for d in &self.draws {
            wtr.write_record([d.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Normalized weights.
    pub fn weights(&self) -> Vec<f64> {
        normalize(&self.log_weights)
    }
}

fn normalize(log_w: &[f64]) -> Vec<f64> {
    let m = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|&l| if l.is_finite() { (l - m).exp() } else { 0.0 }).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Run the sampler with `b` prior proposals.
///
/// Each proposal draws `psi` from its uniform prior, picks one draw from each
/// marginal posterior, builds the pseudo-data and weights `psi` by its ETEL
/// likelihood. Proposals are independent and use per-index RNG streams, so
/// the output does not depend on the number of worker threads.
pub fn abscop_sample(
    cond: &MomentCondition,
    income: &MarginalPosterior,
    wealth: &MarginalPosterior,
    x_income: &[f64],
    x_wealth: &[f64],
    b: usize,
    seed: u64,
) -> Result<DependencePosterior, CopulaError> {
    if income.is_empty() || wealth.is_empty() {
        return Err(CopulaError::EmptyMarginal);
    }
    if x_income.len() != x_wealth.len() || x_income.is_empty() {
        return Err(CopulaError::LengthMismatch { a: x_income.len(), b: x_wealth.len() });
    }
    if b < 1000 {
        return Err(CopulaError::TooFewProposals { b });
    }
    let (lo, hi) = cond.functional.domain();
    let proposal_seed = derive_seed(seed, &["abscop", "proposals"]);

    let results: Vec<(f64, f64)> = (0..b)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(derive_indexed(proposal_seed, i as u64));
            let psi = lo + (hi - lo) * rng.random::<f64>();
            let s1 = rng.random_range(0..income.len());
            let s2 = rng.random_range(0..wealth.len());
            let u = PseudoData::from_marginals(x_income, x_wealth, income, s1, wealth, s2);
            (psi, etel_loglik(cond, psi, &u))
        })
        .collect();
    let proposals: Vec<f64> = results.iter().map(|r| r.0).collect();
    let log_weights: Vec<f64> = results.iter().map(|r| r.1).collect();
    weighted_posterior(cond.functional, proposals, log_weights, seed)
}

/// Summaries and resampling from weighted proposals.
pub fn weighted_posterior(
    functional: Functional,
    proposals: Vec<f64>,
    log_weights: Vec<f64>,
    seed: u64,
) -> Result<DependencePosterior, CopulaError> {
    let b = proposals.len();
    if log_weights.iter().all(|l| !l.is_finite()) {
        return Err(CopulaError::NoSupport);
    }
    let w = normalize(&log_weights);
    let ess = 1.0 / w.iter().map(|x| x * x).sum::<f64>();
    let low_ess = ess < b as f64 / 100.0;
    if low_ess {
        log::warn!("{}: effective sample size {ess:.1} is below B/100", functional.name());
    }

    let mut cum = Vec::with_capacity(b);
    let mut acc = 0.0;
    for x in &w {
        acc += x;
        cum.push(acc);
    }
    let mut rng = rng_from_seed(derive_seed(seed, &["abscop", "resample"]));
    let draws: Vec<f64> = (0..b)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * acc;
            let k = cum.partition_point(|&c| c < u).min(b - 1);
            proposals[k]
        })
        .collect();

    Ok(DependencePosterior {
        functional,
        median: weighted_quantile(&proposals, &w, 0.5),
        lo68: weighted_quantile(&proposals, &w, 0.16),
        hi68: weighted_quantile(&proposals, &w, 0.84),
        proposals,
        log_weights,
        draws,
        ess,
        low_ess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_posterior_summaries() {
        let proposals: Vec<f64> = (0..2000).map(|i| -1.0 + 2.0 * i as f64 / 1999.0).collect();
        // Gaussian log-weights around 0.3 with sd 0.05
        let lw: Vec<f64> = proposals.iter().map(|p| -0.5 * ((p - 0.3) / 0.05f64).powi(2)).collect();
        let post = weighted_posterior(Functional::SpearmanRho, proposals, lw, 1).unwrap();
        assert!((post.median - 0.3).abs() < 0.002);
        assert!((post.lo68 - 0.25).abs() < 0.003);
        assert!((post.hi68 - 0.35).abs() < 0.003);
        assert!(post.lo68 <= post.median && post.median <= post.hi68);
        assert!(!post.low_ess);
        let mean: f64 = post.draws.iter().sum::<f64>() / post.draws.len() as f64;
        assert!((mean - 0.3).abs() < 0.01);
    }

    #[test]
    fn degenerate_weights_flag_low_ess() {
        let proposals: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let mut lw = vec![f64::NEG_INFINITY; 1000];
        lw[500] = -3.0;
        let post = weighted_posterior(Functional::UpperTail(0.95), proposals, lw, 1).unwrap();
        assert!(post.low_ess);
        assert!(post.draws.iter().all(|&d| d == 0.5));
        assert!(weighted_posterior(Functional::SpearmanRho, vec![0.1; 3], vec![f64::NEG_INFINITY; 3], 1).is_err());
    }
}
