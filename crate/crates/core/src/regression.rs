//! Standardized pairwise regressions of peak responses on country features.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::data::{HouseholdRecord, PersonRecord};
use crate::metrics::MetricReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegressionError {
    #[error("column `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("column `{0}` has non-finite values")]
    NonFinite(String),
    #[error("need at least 3 observations, got {0}")]
    TooFew(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("country `{0}` is missing feature `{1}`")]
    MissingCell(String, String),
}

/// Zero mean and unit sample standard deviation.
pub fn standardize(name: &str, column: &[f64]) -> Result<Vec<f64>, RegressionError> {
    if column.iter().any(|v| !v.is_finite()) {
        return Err(RegressionError::NonFinite(name.to_string()));
    }
    let n = column.len();
    if n < 2 {
        return Err(RegressionError::ZeroVariance(name.to_string()));
    }
    let mean = column.iter().sum::<f64>() / n as f64;
    let ss = column.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    let sd = (ss / (n - 1) as f64).sqrt();
    if sd <= 1e-12 * mean.abs().max(1.0) {
        return Err(RegressionError::ZeroVariance(name.to_string()));
    }
    Ok(column.iter().map(|v| (v - mean) / sd).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flag {
    None,
    /// p < 0.05
    Star,
    /// p < 0.01
    Circle,
}

impl Flag {
    pub fn from_p(p: f64) -> Flag {
        if p < 0.01 {
            Flag::Circle
        } else if p < 0.05 {
            Flag::Star
        } else {
            Flag::None
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Flag::None => "",
            Flag::Star => "*",
            Flag::Circle => "°",
        }
    }

    pub fn significant_at_5(self) -> bool {
        self != Flag::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseFit {
    pub coefficient: f64,
    pub p_value: f64,
    pub flag: Flag,
}

/// OLS slope of `y` on `x` (with intercept) and its two-sided t-test on
/// `n - 2` degrees of freedom.
pub fn pairwise_regress(y: &[f64], x: &[f64]) -> Result<PairwiseFit, RegressionError> {
    if y.len() != x.len() {
        return Err(RegressionError::LengthMismatch(y.len(), x.len()));
    }
    let n = y.len();
    if n < 3 {
        return Err(RegressionError::TooFew(n));
    }
    let (mx, my) = (x.iter().sum::<f64>() / n as f64, y.iter().sum::<f64>() / n as f64);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(RegressionError::ZeroVariance("x".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    let df = (n - 2) as f64;
    let se = (rss / df / sxx).sqrt();
    let p_value = if se <= 1e-14 * slope.abs().max(1e-300) {
        if slope == 0.0 { 1.0 } else { 0.0 }
    } else {
        let t = (slope / se).abs();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        (2.0 * (1.0 - dist.cdf(t))).clamp(0.0, 1.0)
    };
    Ok(PairwiseFit { coefficient: slope, p_value, flag: Flag::from_p(p_value) })
}

/// Feature names in table order.
pub const FEATURES: [&str; 23] = [
    "unemployment_rate",
    "avg_pension_income",
    "avg_unemployment_benefits",
    "avg_social_transfers",
    "avg_income",
    "avg_net_wealth",
    "avg_debt",
    "pct_voluntary_pension",
    "pct_self_employed",
    "avg_financial_wealth",
    "pct_business_investment",
    "pct_financial_wealth",
    "pct_home_owners",
    "pct_tertiary_education",
    "avg_age",
    "pct_retired",
    "avg_children",
    "pct_single",
    "avg_household_size",
    "dependence_t0",
    "gini_bivariate_t0",
    "gini_net_wealth_t0",
    "gini_income_t0",
];

/// Minimum ISCED level counted as tertiary.
pub const TERTIARY_LEVEL: u32 = 5;

fn wmean(values: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (s, w) = values.fold((0.0, 0.0), |(s, w), (v, wi)| (s + v * wi, w + wi));
    if w > 0.0 { s / w } else { 0.0 }
}

fn share(flags: impl Iterator<Item = (bool, f64)>) -> f64 {
    100.0 * wmean(flags.map(|(b, w)| (if b { 1.0 } else { 0.0 }, w)))
}

/// Country characteristics aggregated from the micro data with household
/// weights; person-level shares use the weight of the person's household.
/// Households drawing pension income count as retired.
pub fn country_features(households: &[HouseholdRecord], persons: &[PersonRecord], baseline: &MetricReport) -> Vec<f64> {
    let hw: HashMap<&str, f64> = households.iter().map(|h| (h.household_id.as_str(), h.weight)).collect();
    let pw = |p: &PersonRecord| hw.get(p.household_id.as_str()).copied().unwrap_or(0.0);
    let mut ub: HashMap<&str, f64> = HashMap::new();
    let mut size: HashMap<&str, f64> = HashMap::new();
    let mut kids: HashMap<&str, u32> = HashMap::new();
    for p in persons {
        *ub.entry(p.household_id.as_str()).or_default() += p.unemployment_benefits;
        *size.entry(p.household_id.as_str()).or_default() += 1.0;
        let k = kids.entry(p.household_id.as_str()).or_default();
        *k = (*k).max(p.n_children);
    }
    let hh = |f: &dyn Fn(&HouseholdRecord) -> f64| wmean(households.iter().map(|h| (f(h), h.weight)));
    let hshare = |f: &dyn Fn(&HouseholdRecord) -> bool| share(households.iter().map(|h| (f(h), h.weight)));
    let pshare = |f: &dyn Fn(&PersonRecord) -> bool| share(persons.iter().map(|p| (f(p), pw(p))));
    let financial = |h: &HouseholdRecord| h.wealth[3..8].iter().sum::<f64>();
    let ub_of = |h: &HouseholdRecord| ub.get(h.household_id.as_str()).copied().unwrap_or(0.0);
    vec![
        pshare(&|p| !p.employed),
        hh(&|h| h.income[2]),
        hh(&ub_of),
        hh(&|h| (h.income[5] - ub_of(h)).max(0.0)),
        hh(&|h| h.total_income()),
        hh(&|h| h.net_wealth()),
        hh(&|h| h.debt()),
        hshare(&|h| h.wealth[5] > 0.0),
        hshare(&|h| h.income[1] > 0.0),
        hh(&financial),
        hshare(&|h| h.wealth[2] > 0.0),
        hshare(&|h| financial(h) > 0.0),
        hshare(&|h| h.wealth[0] > 0.0),
        pshare(&|p| p.education >= TERTIARY_LEVEL),
        wmean(persons.iter().map(|p| (p.age, pw(p)))),
        hshare(&|h| h.income[2] > 0.0),
        hh(&|h| kids.get(h.household_id.as_str()).copied().unwrap_or(0) as f64),
        pshare(&|p| p.marital_status == "single"),
        hh(&|h| size.get(h.household_id.as_str()).copied().unwrap_or(0.0)),
        baseline.spearman_rho,
        baseline.gini_bivariate,
        baseline.gini_net_wealth,
        baseline.gini_income,
    ]
}

/// Rows are countries in insertion order, columns follow [`FEATURES`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CountryFeatureTable {
    pub countries: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CountryFeatureTable {
    pub fn push(&mut self, country: &str, row: Vec<f64>) -> Result<(), RegressionError> {
        if row.len() != FEATURES.len() {
            return Err(RegressionError::LengthMismatch(row.len(), FEATURES.len()));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(RegressionError::MissingCell(country.to_string(), FEATURES[j].to_string()));
        }
        self.countries.push(country.to_string());
        self.values.push(row);
        Ok(())
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["country"];
        header.extend(FEATURES);
        wtr.write_record(&header)?;
        for (c, row) in self.countries.iter().zip(&self.values) {
            let mut rec = vec![c.clone()];
            rec.extend(row.iter().map(|v| format!("{v:.6}")));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Coefficients for every (feature, response) pair. Constant columns cannot
/// be standardized and are dropped with a warning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTable {
    pub features: Vec<String>,
    pub responses: Vec<String>,
    /// `[feature][response]`
    pub fits: Vec<Vec<PairwiseFit>>,
}

/// `responses` maps a column name (e.g. `target:gini_income`) to peak
/// responses ordered like `table.countries`.
pub fn exploratory_regressions(
    table: &CountryFeatureTable,
    responses: &BTreeMap<String, Vec<f64>>,
) -> Result<RegressionTable, RegressionError> {
    let n = table.countries.len();
    if n < 3 {
        return Err(RegressionError::TooFew(n));
    }
    let mut feats = Vec::new();
    for (j, name) in FEATURES.iter().enumerate() {
        match standardize(name, &table.column(j)) {
            Ok(col) => feats.push((name.to_string(), col)),
            Err(RegressionError::ZeroVariance(c)) => log::warn!("dropping constant feature `{c}`"),
            Err(e) => return Err(e),
        }
    }
    let mut resp = Vec::new();
    for (name, y) in responses {
        if y.len() != n {
            return Err(RegressionError::LengthMismatch(y.len(), n));
        }
        match standardize(name, y) {
            Ok(col) => resp.push((name.clone(), col)),
            Err(RegressionError::ZeroVariance(c)) => log::warn!("dropping constant response `{c}`"),
            Err(e) => return Err(e),
        }
    }
    let fits = feats
        .iter()
        .map(|(_, x)| resp.iter().map(|(_, y)| pairwise_regress(y, x)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RegressionTable {
        features: feats.into_iter().map(|f| f.0).collect(),
        responses: resp.into_iter().map(|r| r.0).collect(),
        fits,
    })
}

impl RegressionTable {
    /// Rows are features; each response gives a coefficient column and a
    /// flag column.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["feature".to_string()];
        for r in &self.responses {
            header.push(r.clone());
            header.push(format!("{r}_flag"));
        }
        wtr.write_record(&header)?;
        for (f, row) in self.features.iter().zip(&self.fits) {
            let mut rec = vec![f.clone()];
            for fit in row {
                rec.push(format!("{:.6}", fit.coefficient));
                rec.push(fit.flag.symbol().to_string());
            }
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}
