//! Random-walk Metropolis–Hastings for the marginal families.
//!
//! Proposals are componentwise Gaussian on an unconstrained scale (log for
//! positive parameters, logit for bounded ones). Step sizes are tuned by
//! Robbins–Monro towards the target acceptance rate during burn-in only, so
//! the retained chain is a plain fixed-kernel Metropolis chain.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::family::{FamilyTag, MarginalFamily, ParamKind};
use super::MarginalError;
use crate::rng::rng_from_seed;
use crate::stats::{quantile, softplus};

/// Independent priors: inverse-gamma on positive parameters, normal on real
/// ones. Bounded parameters get a flat prior on their support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub ig_shape: f64,
    pub ig_scale: f64,
    pub normal_mean: f64,
    pub normal_sd: f64,
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec { ig_shape: 2.1, ig_scale: 1.1, normal_mean: 0.0, normal_sd: 10.0 }
    }
}

impl PriorSpec {
    fn log_density(&self, kind: ParamKind, v: f64) -> f64 {
        match kind {
            ParamKind::Positive => {
                let (a, b) = (self.ig_shape, self.ig_scale);
                a * b.ln() - ln_gamma(a) - (a + 1.0) * v.ln() - b / v
            }
            ParamKind::Real => {
                let z = (v - self.normal_mean) / self.normal_sd;
                -0.5 * z * z - self.normal_sd.ln() - 0.918_938_533_204_672_8
            }
            ParamKind::Bounded(upper) => -upper.ln(),
            ParamKind::Fixed => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub target_acceptance: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig { iterations: 20_000, burn_in: 10_000, thin: 5, target_acceptance: 0.3 }
    }
}

impl ChainConfig {
    pub fn short(iterations: usize, burn_in: usize, thin: usize) -> Self {
        ChainConfig { iterations, burn_in, thin, ..Default::default() }
    }
}

/// Posterior sample for one fitted marginal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalPosterior {
    pub family: FamilyTag,
    pub param_names: Vec<String>,
    /// One row per retained draw, full parameter vector in `param_names` order.
    pub draws: Vec<Vec<f64>>,
    pub log_posterior: Vec<f64>,
    pub log_likelihood: Vec<f64>,
    pub acceptance_rate: f64,
    pub n: usize,
    /// Added to the data before evaluating the family (non-zero only when a
    /// shifted log-normal is fitted to data with non-positive values).
    pub data_shift: f64,
}

impl MarginalPosterior {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn family_at(&self, s: usize) -> MarginalFamily {
        self.family.with_params(&self.draws[s])
    }

    pub fn posterior_mean(&self) -> Vec<f64> {
        let k = self.param_names.len();
        let mut m = vec![0.0; k];
        for d in &self.draws {
            for (acc, v) in m.iter_mut().zip(d) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.draws.len() as f64);
        m
    }

    /// Equal-tailed credible interval for parameter `j`.
    pub fn credible_interval(&self, j: usize, level: f64) -> (f64, f64) {
        let col: Vec<f64> = self.draws.iter().map(|d| d[j]).collect();
        let a = (1.0 - level) / 2.0;
        (quantile(&col, a), quantile(&col, 1.0 - a))
    }

    /// CDF of the raw (unshifted) data value under draw `s`.
    pub fn cdf_at(&self, s: usize, x: f64) -> f64 {
        self.family_at(s).cdf_unchecked(x + self.data_shift)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(&self.param_names)?;
        for d in &self.draws {
            wtr.write_record(d.iter().map(|v| v.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Precomputed sufficient pieces of the data for fast likelihood evaluation.
#[derive(Debug, Clone)]
pub(crate) struct LogLik {
    family: FamilyTag,
    n: usize,
    xs: Vec<f64>,
    ln_x: Vec<f64>,
    sum_ln_x: f64,
    neg_ln_abs: Vec<f64>,
    sum_neg_ln_abs: f64,
    n_zero: usize,
}

impl LogLik {
    pub(crate) fn new(family: FamilyTag, data: &[f64]) -> Self {
        let mut ll = LogLik {
            family,
            n: data.len(),
            xs: Vec::new(),
            ln_x: Vec::new(),
            sum_ln_x: 0.0,
            neg_ln_abs: Vec::new(),
            sum_neg_ln_abs: 0.0,
            n_zero: 0,
        };
        match family {
            FamilyTag::ShiftedLogNormal => ll.xs = data.to_vec(),
            FamilyTag::SinghMaddala | FamilyTag::Dagum => {
                ll.ln_x = data.iter().map(|x| x.ln()).collect();
            }
            FamilyTag::NegPosMixture => {
                for &x in data {
                    if x > 0.0 {
                        ll.ln_x.push(x.ln());
                    } else if x < 0.0 {
                        ll.neg_ln_abs.push((-x).ln());
                    } else {
                        ll.n_zero += 1;
                    }
                }
            }
        }
        ll.sum_ln_x = ll.ln_x.iter().sum();
        ll.sum_neg_ln_abs = ll.neg_ln_abs.iter().sum();
        ll
    }

    fn dagum_sum(&self, c: f64, d: f64, p: f64) -> f64 {
        let n = self.ln_x.len() as f64;
        if n == 0.0 {
            return 0.0;
        }
        let lc = c.ln();
        let sum_ln_y = -d * (self.sum_ln_x - n * lc);
        let sp: f64 = self.ln_x.iter().map(|lx| softplus(-d * (lx - lc))).sum();
        n * (p.ln() + d.ln()) + sum_ln_y - (p + 1.0) * sp - self.sum_ln_x
    }

    pub(crate) fn eval(&self, p: &[f64]) -> f64 {
        let n = self.n as f64;
        match self.family {
            FamilyTag::SinghMaddala => {
                let (a, b, q) = (p[0], p[1], p[2]);
                let lb = b.ln();
                let sp: f64 = self.ln_x.iter().map(|lx| softplus(a * (lx - lb))).sum();
                n * (a.ln() + q.ln() - a * lb) + (a - 1.0) * self.sum_ln_x - (q + 1.0) * sp
            }
            FamilyTag::Dagum => self.dagum_sum(p[0], p[1], p[2]),
            FamilyTag::ShiftedLogNormal => {
                let (mu, sigma, gamma) = (p[0], p[1], p[2]);
                let mut s = 0.0;
                for &x in &self.xs {
                    let y = x - gamma;
                    if y <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    let ly = y.ln();
                    let z = (ly - mu) / sigma;
                    s += -ly - 0.5 * z * z;
                }
                s - n * (sigma.ln() + 0.918_938_533_204_672_8)
            }
            FamilyTag::NegPosMixture => {
                let (w_neg, w_zero, l, k) = (p[0], p[1], p[2], p[3]);
                let n_neg = self.neg_ln_abs.len() as f64;
                let n_pos = self.ln_x.len() as f64;
                let mut s = 0.0;
                if n_neg > 0.0 {
                    let ll = l.ln();
                    let tail: f64 = self.neg_ln_abs.iter().map(|la| (k * (la - ll)).exp()).sum();
                    s += n_neg * (w_neg.ln() + k.ln() - ll) + (k - 1.0) * (self.sum_neg_ln_abs - n_neg * ll)
                        - tail;
                }
                if self.n_zero > 0 {
                    s += self.n_zero as f64 * w_zero.ln();
                }
                if n_pos > 0.0 {
                    s += n_pos * (1.0 - w_neg - w_zero).ln() + self.dagum_sum(p[4], p[5], p[6]);
                }
                s
            }
        }
    }
}

/// Unconstrained <-> natural parameter map.
fn to_natural(kind: ParamKind, eta: f64) -> f64 {
    match kind {
        ParamKind::Positive => eta.exp(),
        ParamKind::Real | ParamKind::Fixed => eta,
        ParamKind::Bounded(u) => u / (1.0 + (-eta).exp()),
    }
}

fn to_unconstrained(kind: ParamKind, v: f64) -> f64 {
    match kind {
        ParamKind::Positive => v.ln(),
        ParamKind::Real | ParamKind::Fixed => v,
        ParamKind::Bounded(u) => {
            let s = (v / u).clamp(1e-12, 1.0 - 1e-12);
            (s / (1.0 - s)).ln()
        }
    }
}

fn log_jacobian(kind: ParamKind, eta: f64) -> f64 {
    match kind {
        ParamKind::Positive => eta,
        ParamKind::Real | ParamKind::Fixed => 0.0,
        // d/deta U sigmoid(eta) = U s (1 - s)
        ParamKind::Bounded(u) => u.ln() - softplus(-eta) - softplus(eta),
    }
}

/// Data after any support shift, plus the parameter layout for `family`.
pub(crate) struct Prepared {
    pub data: Vec<f64>,
    pub shift: f64,
    pub kinds: Vec<ParamKind>,
    pub init: Vec<f64>,
}

fn log_logistic_init(positive: &[f64]) -> (f64, f64) {
    // log-logistic quartiles: ln Q3 - ln Q1 = 2 ln 3 / shape
    let q1 = quantile(positive, 0.25);
    let q2 = quantile(positive, 0.5);
    let q3 = quantile(positive, 0.75);
    let spread = (q3.ln() - q1.ln()).max(1e-3);
    let shape = (2.0 * 3f64.ln() / spread).clamp(0.2, 50.0);
    (q2, shape)
}

pub(crate) fn prepare(data: &[f64], family: FamilyTag) -> Result<Prepared, MarginalError> {
    if data.iter().any(|x| !x.is_finite()) {
        return Err(MarginalError::NonFiniteData);
    }
    let min = data.iter().copied().fold(f64::INFINITY, f64::min);
    let max = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Err(MarginalError::DegenerateData);
    }
    match family {
        FamilyTag::SinghMaddala | FamilyTag::Dagum => {
            if min <= 0.0 {
                return Err(MarginalError::OutsideSupport { family, value: min });
            }
            let (scale, shape) = log_logistic_init(data);
            Ok(Prepared {
                data: data.to_vec(),
                shift: 0.0,
                kinds: vec![ParamKind::Positive; 3],
                init: if family == FamilyTag::SinghMaddala {
                    vec![shape, scale, 1.0]
                } else {
                    vec![scale, shape, 1.0]
                },
            })
        }
        FamilyTag::ShiftedLogNormal => {
            let shift = if min <= 0.0 { 1.0 - min } else { 0.0 };
            let shifted: Vec<f64> = data.iter().map(|x| x + shift).collect();
            let smin = min + shift;
            let upper = smin * (1.0 - 1e-9);
            let gamma0 = 0.5 * upper;
            let logs: Vec<f64> = shifted.iter().map(|x| (x - gamma0).ln()).collect();
            let mu0 = crate::stats::mean(&logs);
            let sd0 = crate::stats::variance(&logs).sqrt().max(1e-3);
            Ok(Prepared {
                data: shifted,
                shift,
                kinds: vec![ParamKind::Real, ParamKind::Positive, ParamKind::Bounded(upper)],
                init: vec![mu0, sd0, gamma0],
            })
        }
        FamilyTag::NegPosMixture => {
            let n = data.len() as f64;
            let negs: Vec<f64> = data.iter().filter(|&&x| x < 0.0).map(|x| -x).collect();
            let positives: Vec<f64> = data.iter().copied().filter(|&x| x > 0.0).collect();
            let n_zero = data.iter().filter(|&&x| x == 0.0).count() as f64;
            if positives.len() < 2 {
                return Err(MarginalError::OutsideSupport { family, value: max });
            }
            let w_neg = negs.len() as f64 / n;
            let w_zero = n_zero / n;
            let l0 = if negs.is_empty() { 1.0 } else { crate::stats::mean(&negs) };
            let (c0, d0) = log_logistic_init(&positives);
            Ok(Prepared {
                data: data.to_vec(),
                shift: 0.0,
                kinds: vec![
                    ParamKind::Fixed,
                    ParamKind::Fixed,
                    ParamKind::Positive,
                    ParamKind::Positive,
                    ParamKind::Positive,
                    ParamKind::Positive,
                    ParamKind::Positive,
                ],
                init: vec![w_neg, w_zero, l0, 1.0, c0, d0, 1.0],
            })
        }
    }
}

/// Fit `family` to `data` by adaptive random-walk Metropolis–Hastings.
pub fn rwmh_fit(
    data: &[f64],
    family: FamilyTag,
    prior: &PriorSpec,
    chain: &ChainConfig,
    seed: u64,
) -> Result<MarginalPosterior, MarginalError> {
    if data.len() < 50 {
        return Err(MarginalError::TooFewObservations { n: data.len(), min: 50 });
    }
    if chain.iterations <= chain.burn_in || chain.thin == 0 {
        return Err(MarginalError::InvalidChain);
    }
    let prep = prepare(data, family)?;
    let loglik = LogLik::new(family, &prep.data);
    let kinds = prep.kinds;
    let dim = kinds.len();
    let free: Vec<usize> = (0..dim).filter(|&j| kinds[j] != ParamKind::Fixed).collect();

    let target = |eta: &[f64], theta: &mut [f64]| -> (f64, f64) {
        let mut lp = 0.0;
        for j in 0..dim {
            theta[j] = to_natural(kinds[j], eta[j]);
            lp += prior.log_density(kinds[j], theta[j]) + log_jacobian(kinds[j], eta[j]);
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return (f64::NEG_INFINITY, f64::NEG_INFINITY);
        }
        let ll = loglik.eval(theta);
        if ll.is_nan() {
            return (f64::NEG_INFINITY, f64::NEG_INFINITY);
        }
        (ll + lp, ll)
    };

    let mut rng = rng_from_seed(seed);
    let mut eta: Vec<f64> = (0..dim).map(|j| to_unconstrained(kinds[j], prep.init[j])).collect();
    let mut theta = vec![0.0; dim];
    let (mut cur_lt, mut cur_ll) = target(&eta, &mut theta);
    if !cur_lt.is_finite() {
        return Err(MarginalError::AdaptationFailure { family, sweeps: 0 });
    }

    let mut log_step = vec![(0.1f64).ln(); dim];
    let mut stale_sweeps = 0usize;
    let mut accepted_post = 0usize;
    let mut proposed_post = 0usize;
    let n_keep = (chain.iterations - chain.burn_in).div_ceil(chain.thin);
    let mut draws = Vec::with_capacity(n_keep);
    let mut log_post = Vec::with_capacity(n_keep);
    let mut log_lik = Vec::with_capacity(n_keep);
    let mut prop = eta.clone();
    let mut prop_theta = theta.clone();

    for it in 0..chain.iterations {
        let burning = it < chain.burn_in;
        let mut any_accept = false;
        for &j in &free {
            let z: f64 = rng.sample(StandardNormal);
            prop[j] = eta[j] + log_step[j].exp() * z;
            let (lt, ll) = target(&prop, &mut prop_theta);
            let log_alpha = lt - cur_lt;
            let u: f64 = rng.random();
            let accept = lt.is_finite() && u.ln() < log_alpha;
            if accept {
                eta[j] = prop[j];
                cur_lt = lt;
                cur_ll = ll;
                any_accept = true;
            } else {
                prop[j] = eta[j];
            }
            if burning {
                let alpha = if lt.is_finite() { log_alpha.min(0.0).exp() } else { 0.0 };
                let gain = ((it + 1) as f64).powf(-0.6);
                log_step[j] += gain * (alpha - chain.target_acceptance);
            } else {
                proposed_post += 1;
                accepted_post += accept as usize;
            }
        }
        if any_accept {
            stale_sweeps = 0;
        } else {
            stale_sweeps += 1;
            if stale_sweeps >= 10 * dim {
                return Err(MarginalError::AdaptationFailure { family, sweeps: stale_sweeps });
            }
        }
        if !burning && (it - chain.burn_in) % chain.thin == 0 {
            for j in 0..dim {
                theta[j] = to_natural(kinds[j], eta[j]);
            }
            draws.push(theta.clone());
            log_post.push(cur_lt);
            log_lik.push(cur_ll);
        }
    }

    Ok(MarginalPosterior {
        family,
        param_names: family.param_names().iter().map(|s| s.to_string()).collect(),
        draws,
        log_posterior: log_post,
        log_likelihood: log_lik,
        acceptance_rate: accepted_post as f64 / proposed_post.max(1) as f64,
        n: data.len(),
        data_shift: prep.shift,
    })
}

/// Log-likelihood of `data` at a full parameter vector, applying `shift`.
pub fn log_likelihood(family: FamilyTag, params: &[f64], data: &[f64], shift: f64) -> f64 {
    let shifted: Vec<f64>;
    let d = if shift != 0.0 {
        shifted = data.iter().map(|x| x + shift).collect();
        &shifted[..]
    } else {
        data
    };
    LogLik::new(family, d).eval(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn fast_loglik_matches_pointwise_density() {
        let fams = [
            MarginalFamily::SinghMaddala { a: 2.0, b: 10.0, q: 1.5 },
            MarginalFamily::Dagum { c: 10.0, d: 3.0, p: 0.8 },
            MarginalFamily::ShiftedLogNormal { mu: 1.0, sigma: 0.5, gamma: 2.0 },
            MarginalFamily::NegPosMixture { w_neg: 0.1, w_zero: 0.05, l: 2.0, k: 1.5, c: 10.0, d: 3.0, p: 1.0 },
        ];
        let mut rng = rng_from_seed(3);
        for f in fams {
            let mut xs: Vec<f64> = (0..300).map(|_| f.sample(&mut rng)).collect();
            if let MarginalFamily::NegPosMixture { .. } = f {
                xs.iter_mut().take(10).for_each(|x| *x = 0.0);
            }
            let direct: f64 = xs.iter().map(|&x| f.log_pdf_unchecked(x)).sum();
            let fast = LogLik::new(f.tag(), &xs).eval(&f.params());
            assert!((direct - fast).abs() < 1e-8 * direct.abs(), "{f:?}: {direct} vs {fast}");
        }
    }

    #[test]
    fn too_few_and_degenerate() {
        let prior = PriorSpec::default();
        let chain = ChainConfig::short(200, 100, 1);
        let small = vec![1.0; 10];
        assert!(matches!(
            rwmh_fit(&small, FamilyTag::Dagum, &prior, &chain, 1),
            Err(MarginalError::TooFewObservations { .. })
        ));
        let constant = vec![5.0; 100];
        let err = rwmh_fit(&constant, FamilyTag::SinghMaddala, &prior, &chain, 1).unwrap_err();
        assert!(matches!(err, MarginalError::DegenerateData | MarginalError::AdaptationFailure { .. }));
    }

    #[test]
    fn negative_data_outside_positive_support() {
        let mut data: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        data[0] = -3.0;
        let err = rwmh_fit(&data, FamilyTag::SinghMaddala, &PriorSpec::default(), &ChainConfig::short(100, 50, 1), 0)
            .unwrap_err();
        assert!(matches!(err, MarginalError::OutsideSupport { .. }));
    }

    #[test]
    fn lognormal_shift_for_nonpositive_data() {
        let f = MarginalFamily::ShiftedLogNormal { mu: 1.0, sigma: 0.4, gamma: 0.0 };
        let mut rng = rng_from_seed(11);
        let data: Vec<f64> = (0..400).map(|_| f.sample(&mut rng) - 5.0).collect();
        let post = rwmh_fit(&data, FamilyTag::ShiftedLogNormal, &PriorSpec::default(), &ChainConfig::short(1500, 750, 1), 2)
            .unwrap();
        assert!(post.data_shift > 0.0);
        for s in 0..post.len() {
            let fam = post.family_at(s);
            fam.validate().unwrap();
            let min = data.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(post.cdf_at(s, min) >= 0.0);
        }
    }
}
