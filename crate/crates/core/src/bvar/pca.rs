use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::BvarError;

/// First principal component of long-rate spreads against a benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadFactor {
    pub factor: Vec<f64>,
    /// Unit-norm loadings with a positive sum.
    pub loadings: Vec<f64>,
    pub explained_share: f64,
}

/// Spreads `rate_c - benchmark` are demeaned; the factor is their projection
/// on the leading eigenvector of the sample covariance.
pub fn pca_spread(long_rates: &[Vec<f64>], benchmark: &[f64]) -> Result<SpreadFactor, BvarError> {
    let n = long_rates.len();
    if n < 2 {
        return Err(BvarError::TooFewSeries(n));
    }
    let t = benchmark.len();
    if t < 2 || long_rates.iter().any(|r| r.len() != t) {
        return Err(BvarError::LengthMismatch);
    }
    let mut x = DMatrix::from_fn(t, n, |r, c| long_rates[c][r] - benchmark[r]);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(BvarError::NonFinite);
    }
    for mut col in x.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
    let cov = x.transpose() * &x / (t as f64 - 1.0);
    let total = cov.trace();
    if total <= 1e-14 {
        return Err(BvarError::ConstantSpreads);
    }
    let eig = SymmetricEigen::new(cov);
    let (imax, lmax) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let mut v = eig.eigenvectors.column(imax).into_owned();
    if v.sum() < 0.0 {
        v = -v;
    }
    let factor = (&x * &v).iter().copied().collect();
    Ok(SpreadFactor { factor, loadings: v.iter().copied().collect(), explained_share: lmax / total })
}
