//! Weighted inequality and dependence metrics.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::HouseholdRecord;
use crate::rng::rng_from_seed;

/// Above this many observations the bivariate Gini switches from the exact
/// double sum to Monte Carlo pairs.
pub const EXACT_PAIR_LIMIT: usize = 20_000;
const MC_PAIRS: usize = 4_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("value {value} at index {index} is negative")]
    Negative { index: usize, value: f64 },
    #[error("weights must be nonnegative with a positive sum")]
    BadWeights,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("coordinate {0} has zero weighted mean")]
    ZeroMean(usize),
    #[error("coordinate {0} is constant, rank correlation undefined")]
    Constant(usize),
    #[error("need at least {min} observations, got {n}")]
    TooFew { n: usize, min: usize },
    #[error("threshold must lie in (0, 1), got {0}")]
    Threshold(f64),
    #[error("no observations in the marginal tail")]
    EmptyTail,
}

fn check_weights(n: usize, w: &[f64]) -> Result<f64, MetricError> {
    if w.len() != n {
        return Err(MetricError::LengthMismatch(n, w.len()));
    }
    let total: f64 = w.iter().sum();
    if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) || total <= 0.0 {
        return Err(MetricError::BadWeights);
    }
    Ok(total)
}

/// Weighted Gini index `sum_ij w_i w_j |v_i - v_j| / (2 W^2 mu)`.
///
/// Evaluated in `O(n log n)` after sorting. All-zero input gives 0.
pub fn gini(values: &[f64], weights: &[f64]) -> Result<f64, MetricError> {
    let total = check_weights(values.len(), weights)?;
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v < 0.0 || !v.is_finite()) {
        return Err(MetricError::Negative { index, value });
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mean_num: f64 = values.iter().zip(weights).map(|(v, w)| v * w).sum();
    if mean_num == 0.0 {
        return Ok(0.0);
    }
    // each unordered pair counted once: sum_i w_i v_i (W_before - W_after)
    let mut before = 0.0;
    let mut acc = 0.0;
    for &i in &idx {
        let after = total - before - weights[i];
        acc += weights[i] * values[i] * (before - after);
        before += weights[i];
    }
    Ok((acc / (total * mean_num)).clamp(0.0, 1.0))
}

/// Bivariate Gini `E|X - X'| / (2 E|X|)` on mean-scaled coordinates with
/// Euclidean norm. Inputs must be nonnegative.
pub fn bivariate_gini(x1: &[f64], x2: &[f64], weights: &[f64]) -> Result<f64, MetricError> {
    let n = x1.len();
    if x2.len() != n {
        return Err(MetricError::LengthMismatch(n, x2.len()));
    }
    let total = check_weights(n, weights)?;
    for xs in [x1, x2] {
        if let Some((index, &value)) = xs.iter().enumerate().find(|(_, v)| **v < 0.0 || !v.is_finite()) {
            return Err(MetricError::Negative { index, value });
        }
    }
    let m1 = x1.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
    let m2 = x2.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
    if m1 <= 0.0 {
        return Err(MetricError::ZeroMean(0));
    }
    if m2 <= 0.0 {
        return Err(MetricError::ZeroMean(1));
    }
    let pts: Vec<[f64; 2]> = x1.iter().zip(x2).map(|(a, b)| [a / m1, b / m2]).collect();
    let norm_mean = pts.iter().zip(weights).map(|(p, w)| w * p[0].hypot(p[1])).sum::<f64>() / total;

    let dist_mean = if n <= EXACT_PAIR_LIMIT {
        let s: f64 = (0..n)
            .into_par_iter()
            .map(|i| {
                let pi = pts[i];
                let mut row = 0.0;
                for j in 0..i {
                    row += weights[j] * (pi[0] - pts[j][0]).hypot(pi[1] - pts[j][1]);
                }
                weights[i] * row
            })
            .sum();
        2.0 * s / (total * total)
    } else {
        let mut cum = Vec::with_capacity(n);
        let mut acc = 0.0;
        for w in weights {
            acc += w;
            cum.push(acc);
        }
        let pick = |u: f64| cum.partition_point(|&c| c < u * acc).min(n - 1);
        let mut rng = rng_from_seed(0x6269_6769_6e69);
        let mut s = 0.0;
        for _ in 0..MC_PAIRS {
            let a = pts[pick(rng.random())];
            let b = pts[pick(rng.random())];
            s += (a[0] - b[0]).hypot(a[1] - b[1]);
        }
        s / MC_PAIRS as f64
    };
    Ok((dist_mean / (2.0 * norm_mean)).clamp(0.0, 1.0))
}

/// Weighted mid-ranks scaled to `(0, 1)`: cumulative weight below the value
/// plus half the weight tied at it, over the total.
pub fn weighted_ranks(xs: &[f64], weights: &[f64], total: f64) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut below = 0.0;
    let mut k = 0;
    while k < idx.len() {
        let mut end = k;
        let mut tied = 0.0;
        while end < idx.len() && xs[idx[end]] == xs[idx[k]] {
            tied += weights[idx[end]];
            end += 1;
        }
        let r = (below + 0.5 * tied) / total;
        for &i in &idx[k..end] {
            out[i] = r;
        }
        below += tied;
        k = end;
    }
    out
}

/// Weighted Spearman rank correlation with average ranks for ties.
pub fn sample_spearman(x1: &[f64], x2: &[f64], weights: &[f64]) -> Result<f64, MetricError> {
    let n = x1.len();
    if x2.len() != n {
        return Err(MetricError::LengthMismatch(n, x2.len()));
    }
    if n < 2 {
        return Err(MetricError::TooFew { n, min: 2 });
    }
    let total = check_weights(n, weights)?;
    let r1 = weighted_ranks(x1, weights, total);
    let r2 = weighted_ranks(x2, weights, total);
    let wmean = |r: &[f64]| r.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() / total;
    let (m1, m2) = (wmean(&r1), wmean(&r2));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (a, b) = (r1[i] - m1, r2[i] - m2);
        sxy += weights[i] * a * b;
        sxx += weights[i] * a * a;
        syy += weights[i] * b * b;
    }
    if sxx <= 0.0 {
        return Err(MetricError::Constant(0));
    }
    if syy <= 0.0 {
        return Err(MetricError::Constant(1));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailSide {
    Upper,
    Lower,
}

/// Empirical tail-dependence plug-in at threshold `t`: weighted share of joint
/// exceedances over the weighted share of exceedances in the first margin.
pub fn sample_tail(x1: &[f64], x2: &[f64], weights: &[f64], t: f64, side: TailSide) -> Result<f64, MetricError> {
    let n = x1.len();
    if x2.len() != n {
        return Err(MetricError::LengthMismatch(n, x2.len()));
    }
    if n < 2 {
        return Err(MetricError::TooFew { n, min: 2 });
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(MetricError::Threshold(t));
    }
    let total = check_weights(n, weights)?;
    let r1 = weighted_ranks(x1, weights, total);
    let r2 = weighted_ranks(x2, weights, total);
    let hit = |u: f64| match side {
        TailSide::Upper => u > t,
        TailSide::Lower => u <= t,
    };
    let (mut joint, mut marg) = (0.0, 0.0);
    for i in 0..n {
        if hit(r1[i]) {
            marg += weights[i];
            if hit(r2[i]) {
                joint += weights[i];
            }
        }
    }
    if marg <= 0.0 {
        return Err(MetricError::EmptyTail);
    }
    Ok(joint / marg)
}

/// Sample values of the inequality and dependence measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub gini_income: f64,
    /// Households with positive net wealth only.
    pub gini_net_wealth: f64,
    /// Gross assets.
    pub gini_wealth: f64,
    pub gini_debt: f64,
    pub gini_bivariate: f64,
    pub spearman_rho: f64,
    pub lambda_upper: Option<f64>,
    pub lambda_lower: Option<f64>,
}

pub const METRIC_COLUMNS: [&str; 8] = [
    "gini_income",
    "gini_net_wealth",
    "gini_wealth",
    "gini_debt",
    "gini_bivariate",
    "spearman_rho",
    "lambda_U",
    "lambda_L",
];

impl MetricReport {
    /// Compute all metrics. Negative total incomes count as zero income;
    /// households with negative net wealth drop out of the net-wealth and
    /// bivariate Ginis. Tail plug-ins are skipped when `tail` is `None`.
    pub fn compute(households: &[HouseholdRecord], tail: Option<(f64, f64)>) -> Result<MetricReport, MetricError> {
        let w: Vec<f64> = households.iter().map(|h| h.weight).collect();
        let income: Vec<f64> = households.iter().map(|h| h.total_income()).collect();
        let net: Vec<f64> = households.iter().map(|h| h.net_wealth()).collect();
        let floored: Vec<f64> = income.iter().map(|v| v.max(0.0)).collect();
        let assets: Vec<f64> = households.iter().map(|h| h.gross_assets().max(0.0)).collect();
        let debt: Vec<f64> = households.iter().map(|h| h.debt().max(0.0)).collect();

        let keep: Vec<usize> = (0..households.len()).filter(|&i| net[i] >= 0.0).collect();
        let kw: Vec<f64> = keep.iter().map(|&i| w[i]).collect();
        let knet: Vec<f64> = keep.iter().map(|&i| net[i]).collect();
        let kinc: Vec<f64> = keep.iter().map(|&i| floored[i]).collect();

        let (lambda_upper, lambda_lower) = match tail {
            Some((tu, tl)) => (
                Some(sample_tail(&income, &net, &w, tu, TailSide::Upper)?),
                Some(sample_tail(&income, &net, &w, tl, TailSide::Lower)?),
            ),
            None => (None, None),
        };
        Ok(MetricReport {
            gini_income: gini(&floored, &w)?,
            gini_net_wealth: gini(&knet, &kw)?,
            gini_wealth: gini(&assets, &w)?,
            gini_debt: gini(&debt, &w)?,
            gini_bivariate: bivariate_gini(&kinc, &knet, &kw)?,
            spearman_rho: sample_spearman(&income, &net, &w)?,
            lambda_upper,
            lambda_lower,
        })
    }

    /// Values in column order; missing tail values are `None`.
    pub fn values(&self) -> [Option<f64>; 8] {
        [
            Some(self.gini_income),
            Some(self.gini_net_wealth),
            Some(self.gini_wealth),
            Some(self.gini_debt),
            Some(self.gini_bivariate),
            Some(self.spearman_rho),
            self.lambda_upper,
            self.lambda_lower,
        ]
    }
}

/// One row per country, columns in [`METRIC_COLUMNS`] order.
pub fn write_reports<W: std::io::Write>(w: W, rows: &[(String, MetricReport)]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["country"];
    header.extend(METRIC_COLUMNS);
    wtr.write_record(&header)?;
    for (country, r) in rows {
        let mut rec = vec![country.clone()];
        rec.extend(r.values().iter().map(|v| v.map(|x| format!("{x:.6}")).unwrap_or_default()));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// `100 (new / base - 1)`; zero when both are zero.
pub fn pct_change(base: f64, new: f64) -> f64 {
    if base == new {
        0.0
    } else {
        100.0 * (new / base - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_gini(v: &[f64], w: &[f64]) -> f64 {
        let tw: f64 = w.iter().sum();
        let mu = v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / tw;
        let mut s = 0.0;
        for i in 0..v.len() {
            for j in 0..v.len() {
                s += w[i] * w[j] * (v[i] - v[j]).abs();
            }
        }
        s / (2.0 * tw * tw * mu)
    }

    #[test]
    fn gini_small_cases() {
        assert_eq!(gini(&[3.0; 5], &[1.0; 5]).unwrap(), 0.0);
        assert_eq!(gini(&[0.0, 7.0], &[1.0, 1.0]).unwrap(), 0.5);
        assert_eq!(gini(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(gini(&[1.0, -1.0], &[1.0, 1.0]), Err(MetricError::Negative { index: 1, .. })));
        let v = [1.0, 4.0, 4.0, 0.5, 9.0, 2.0];
        let w = [0.3, 1.2, 0.7, 2.0, 0.1, 1.0];
        assert!((gini(&v, &w).unwrap() - brute_gini(&v, &w)).abs() < 1e-14);
    }

    #[test]
    fn spearman_extremes() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let up: Vec<f64> = x.iter().map(|v| v * v).collect();
        let down: Vec<f64> = x.iter().map(|v| -v.powi(3)).collect();
        let w = vec![1.0; 20];
        assert!((sample_spearman(&x, &up, &w).unwrap() - 1.0).abs() < 1e-12);
        assert!((sample_spearman(&x, &down, &w).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(sample_spearman(&x, &[1.0; 20], &w), Err(MetricError::Constant(1))));
    }

    #[test]
    fn bivariate_degenerate_and_comonotone() {
        let w = vec![1.0; 4];
        assert_eq!(bivariate_gini(&[2.0; 4], &[5.0; 4], &w).unwrap(), 0.0);
        let v = [1.0, 3.0, 0.0, 8.0];
        let g = gini(&v, &w).unwrap();
        assert!((bivariate_gini(&v, &v, &w).unwrap() - g).abs() < 1e-12);
        assert!(matches!(bivariate_gini(&[0.0; 4], &v, &w), Err(MetricError::ZeroMean(0))));
    }

    #[test]
    fn pct_change_zero_base() {
        assert_eq!(pct_change(0.0, 0.0), 0.0);
        assert!((pct_change(0.4, 0.42) - 5.0).abs() < 1e-12);
    }
}
