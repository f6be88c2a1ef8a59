use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{BvarError, VarDraws};
use crate::stats::band68;

/// Draws whose companion matrix has an eigenvalue above this modulus are
/// excluded from the bands.
pub const EXPLOSIVE_MODULUS: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Shock {
    /// Short-rate (conventional policy) shock.
    Target,
    /// Euro-area spread factor (asset purchase) shock.
    Qe,
}

impl Shock {
    pub const ALL: [Shock; 2] = [Shock::Target, Shock::Qe];

    pub fn variable(&self) -> &'static str {
        match self {
            Shock::Target => "ST-IR",
            Shock::Qe => "EA-spread",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Shock::Target => "target",
            Shock::Qe => "qe",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfSet {
    pub shock_variable: String,
    pub variables: Vec<String>,
    pub horizons: usize,
    /// `[draw][variable][h]` for retained (non-explosive) draws.
    pub draws: Vec<Vec<Vec<f64>>>,
    pub median: Vec<Vec<f64>>,
    pub lo68: Vec<Vec<f64>>,
    pub hi68: Vec<Vec<f64>>,
    /// Indices of draws dropped as explosive.
    pub excluded: Vec<usize>,
}

impl IrfSet {
    pub fn median_path(&self, variable: &str) -> Option<&[f64]> {
        self.variables.iter().position(|v| v == variable).map(|i| self.median[i].as_slice())
    }

    /// Columns `variable, horizon, lo68, median, hi68`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["variable", "horizon", "lo68", "median", "hi68"])?;
        for (i, v) in self.variables.iter().enumerate() {
            for h in 0..=self.horizons {
                wtr.write_record([
                    v.clone(),
                    h.to_string(),
                    format!("{:.10}", self.lo68[i][h]),
                    format!("{:.10}", self.median[i][h]),
                    format!("{:.10}", self.hi68[i][h]),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn companion(lags: &[DMatrix<f64>]) -> DMatrix<f64> {
    let m = lags[0].nrows();
    let p = lags.len();
    let mut c = DMatrix::zeros(m * p, m * p);
    for (l, a) in lags.iter().enumerate() {
        c.view_mut((0, l * m), (m, m)).copy_from(a);
    }
    for i in m..m * p {
        c[(i, i - m)] = 1.0;
    }
    c
}

/// Largest eigenvalue modulus of the companion matrix.
pub fn spectral_radius(lags: &[DMatrix<f64>]) -> f64 {
    let c = companion(lags);
    c.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Responses `[variable][h]`, `h = 0..=horizons`, to `impact` propagated
/// through lag matrices `A_1..A_P`.
pub fn impulse_response(lags: &[DMatrix<f64>], impact: &DVector<f64>, horizons: usize) -> Vec<Vec<f64>> {
    let m = impact.len();
    let mut path: Vec<DVector<f64>> = Vec::with_capacity(horizons + 1);
    path.push(impact.clone());
    for h in 1..=horizons {
        let mut next = DVector::zeros(m);
        for (l, a) in lags.iter().enumerate() {
            if h > l {
                next += a * &path[h - 1 - l];
            }
        }
        path.push(next);
    }
    (0..m).map(|i| path.iter().map(|v| v[i]).collect()).collect()
}

/// One-standard-deviation Cholesky shock column; entries above the shocked
/// position are exactly zero.
fn shock_column(sigma: &DMatrix<f64>, s: usize, scale: f64) -> Option<DVector<f64>> {
    let l = Cholesky::new(sigma.clone())?.l();
    Some(DVector::from_fn(sigma.nrows(), |i, _| if i < s { 0.0 } else { scale * l[(i, s)] }))
}

/// Structural IRFs for a shock to `shock_variable`, scaled by `scale` standard
/// deviations (1 for the usual one-s.d. shock).
pub fn irf(draws: &VarDraws, shock_variable: &str, horizons: usize, scale: f64) -> Result<IrfSet, BvarError> {
    let s = draws
        .spec
        .index_of(shock_variable)
        .ok_or_else(|| BvarError::UnknownShock(shock_variable.to_string()))?;
    let m = draws.spec.m();
    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    for d in 0..draws.len() {
        let lags: Vec<DMatrix<f64>> = (1..=draws.spec.lags).map(|l| draws.lag_matrix(d, l)).collect();
        if spectral_radius(&lags) > EXPLOSIVE_MODULUS {
            excluded.push(d);
            continue;
        }
        let col = shock_column(&draws.sigma[d], s, scale).ok_or(BvarError::NotSpd { attempts: 0 })?;
        kept.push(impulse_response(&lags, &col, horizons));
    }
    if kept.is_empty() {
        return Err(BvarError::AllExplosive);
    }
    if !excluded.is_empty() {
        log::warn!("{} of {} draws explosive, excluded from IRF bands", excluded.len(), draws.len());
    }
    let mut median = vec![vec![0.0; horizons + 1]; m];
    let mut lo68 = median.clone();
    let mut hi68 = median.clone();
    for i in 0..m {
        for h in 0..=horizons {
            let xs: Vec<f64> = kept.iter().map(|d| d[i][h]).collect();
            let (lo, med, hi) = band68(&xs);
            lo68[i][h] = lo;
            median[i][h] = med;
            hi68[i][h] = hi;
        }
    }
    Ok(IrfSet {
        shock_variable: shock_variable.to_string(),
        variables: draws.spec.names.clone(),
        horizons,
        draws: kept,
        median,
        lo68,
        hi68,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ar1_geometric_decay() {
        let a = DMatrix::from_row_slice(1, 1, &[0.9]);
        let r = impulse_response(&[a], &DVector::from_element(1, 1.0), 12);
        assert!((r[0][3] - 0.729).abs() < 1e-15);
    }

    #[test]
    fn var2_recursion_matches_companion_power() {
        let a1 = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, -0.2, 0.3]);
        let a2 = DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.05, -0.1]);
        let imp = DVector::from_column_slice(&[0.0, 1.3]);
        let r = impulse_response(&[a1.clone(), a2.clone()], &imp, 8);
        let c = companion(&[a1, a2]);
        let mut state = DVector::zeros(4);
        state[1] = 1.3;
        for h in 0..=8 {
            assert!((state[0] - r[0][h]).abs() < 1e-14 && (state[1] - r[1][h]).abs() < 1e-14);
            state = &c * state;
        }
    }

    #[test]
    fn spectral_radius_of_diagonal() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -0.8]);
        assert!((spectral_radius(&[a]) - 0.8).abs() < 1e-12);
    }
}
