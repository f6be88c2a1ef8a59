//! Synthetic micro and macro fixtures with known ground truth.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bvar::{simulate_var, spectral_radius, BvarError};
use crate::data::{HouseholdRecord, MacroPanel, PersonRecord, Quarter};
use crate::marginals::MarginalFamily;
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::stats::norm_cdf;

/// Margin used by the household generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SyntheticMargin {
    Family(MarginalFamily),
    Exponential { rate: f64 },
}

impl SyntheticMargin {
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            SyntheticMargin::Family(f) => f.quantile_unchecked(u),
            SyntheticMargin::Exponential { rate } => -(1.0 - u).ln() / rate,
        }
    }
}

/// Draw `n` pairs whose margins are `m1`, `m2` and whose copula is Gaussian
/// with correlation `r`.
pub fn gaussian_copula_pairs(m1: &SyntheticMargin, m2: &SyntheticMargin, r: f64, n: usize, rng: &mut Rng) -> Vec<(f64, f64)> {
    let c = (1.0 - r * r).sqrt();
    (0..n)
        .map(|_| {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = r * z1 + c * rng.sample::<f64, _>(StandardNormal);
            let u1 = norm_cdf(z1).clamp(1e-12, 1.0 - 1e-12);
            let u2 = norm_cdf(z2).clamp(1e-12, 1.0 - 1e-12);
            (m1.quantile(u1), m2.quantile(u2))
        })
        .collect()
}

/// Population Spearman's rho of the Gaussian copula.
pub fn gaussian_spearman(r: f64) -> f64 {
    6.0 / std::f64::consts::PI * (r / 2.0).asin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholdTruth {
    pub income: SyntheticMargin,
    pub net_wealth: SyntheticMargin,
    pub copula_r: f64,
    pub spearman_rho: f64,
}

/// Country-specific margins: even-indexed countries get Singh-Maddala
/// income and shifted log-normal wealth, odd ones Dagum and the mixture.
pub fn country_truth(index: usize, r: f64, rng: &mut Rng) -> HouseholdTruth {
    let u = |rng: &mut Rng, lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    let (income, net_wealth) = if index % 2 == 0 {
        (
            MarginalFamily::SinghMaddala { a: u(rng, 2.0, 3.5), b: u(rng, 20.0, 45.0), q: u(rng, 1.0, 2.0) },
            MarginalFamily::ShiftedLogNormal { mu: u(rng, 4.5, 5.5), sigma: u(rng, 0.9, 1.5), gamma: u(rng, -30.0, -5.0) },
        )
    } else {
        (
            MarginalFamily::Dagum { c: u(rng, 20.0, 45.0), d: u(rng, 2.5, 4.0), p: u(rng, 0.6, 1.2) },
            MarginalFamily::NegPosMixture {
                w_neg: u(rng, 0.03, 0.1),
                w_zero: u(rng, 0.02, 0.06),
                l: u(rng, 5.0, 20.0),
                k: u(rng, 0.8, 1.5),
                c: u(rng, 80.0, 200.0),
                d: u(rng, 1.0, 2.0),
                p: u(rng, 0.5, 1.0),
            },
        )
    };
    HouseholdTruth {
        income: SyntheticMargin::Family(income),
        net_wealth: SyntheticMargin::Family(net_wealth),
        copula_r: r,
        spearman_rho: gaussian_spearman(r),
    }
}

fn gamma(rng: &mut Rng, shape: f64) -> f64 {
    Gamma::new(shape, 1.0).expect("positive shape").sample(rng)
}

fn random_shares(rng: &mut Rng, weights: &[f64]) -> Vec<f64> {
    let g: Vec<f64> = weights.iter().map(|&w| if w > 0.0 { gamma(rng, w) } else { 0.0 }).collect();
    let s: f64 = g.iter().sum();
    g.iter().map(|v| v / s).collect()
}

/// Households and their labour-force members. Totals follow the copula
/// draws exactly; components are random splits of the totals.
pub fn generate_households(country: &str, truth: &HouseholdTruth, n: usize, seed: u64) -> (Vec<HouseholdRecord>, Vec<PersonRecord>) {
    let mut rng = rng_from_seed(derive_seed(seed, &["households", country]));
    let pairs = gaussian_copula_pairs(&truth.income, &truth.net_wealth, truth.copula_r, n, &mut rng);
    let country_shift: f64 = rng.random_range(-0.4..0.4);
    let mut households = Vec::with_capacity(n);
    let mut persons = Vec::new();
    for (i, &(income, net)) in pairs.iter().enumerate() {
        let hid = format!("{country}-{i:05}");
        let weight = 500.0 + 1500.0 * rng.random::<f64>();
        let adults = match rng.random::<f64>() {
            v if v < 0.15 => 0,
            v if v < 0.5 => 1,
            v if v < 0.9 => 2,
            _ => 3,
        };
        let n_children: u32 = if adults == 0 { 0 } else { rng.random_range(0..4) };
        let mut members = Vec::with_capacity(adults);
        for j in 0..adults {
            let age = rng.random_range(18..65) as f64;
            let education = rng.random_range(0..7u32);
            let latent = 1.1 + country_shift + 0.25 * (education as f64 - 3.0) - 0.0015 * (age - 42.0).powi(2)
                + 0.5 * rng.sample::<f64, _>(StandardNormal);
            let employed = latent > 0.0;
            let marital = if adults >= 2 && j < 2 {
                "married"
            } else {
                ["single", "single", "divorced", "widowed"][rng.random_range(0..4)]
            };
            members.push(PersonRecord {
                person_id: format!("{hid}-{j}"),
                household_id: hid.clone(),
                employed,
                gender: if rng.random::<bool>() { "f".into() } else { "m".into() },
                education,
                age,
                marital_status: marital.into(),
                n_children,
                tenure_years: ((age - 18.0) * rng.random::<f64>()).floor(),
                employment_income: 0.0,
                unemployment_benefits: 0.0,
            });
        }
        let n_emp = members.iter().filter(|p| p.employed).count();
        let n_unemp = members.len() - n_emp;
        let self_emp = rng.random::<f64>() < 0.12;
        let weights = [
            if n_emp > 0 { 6.0 * n_emp as f64 } else { 0.0 },
            if self_emp { 2.0 } else { 0.0 },
            if adults == 0 { 6.0 } else if rng.random::<f64>() < 0.1 { 1.0 } else { 0.0 },
            0.3,
            0.2,
            if n_unemp > 0 { 2.0 * n_unemp as f64 } else { 0.3 },
        ];
        let shares = random_shares(&mut rng, &weights);
        let inc: [f64; 6] = std::array::from_fn(|k| income * shares[k]);
        if n_emp > 0 {
            let w: Vec<f64> = members
                .iter()
                .map(|p| if p.employed { (0.15 * p.education as f64 + 0.3 * rng.sample::<f64, _>(StandardNormal)).exp() } else { 0.0 })
                .collect();
            let s: f64 = w.iter().sum();
            for (p, wi) in members.iter_mut().zip(&w) {
                p.employment_income = inc[0] * wi / s;
            }
        }
        if n_unemp > 0 {
            let ub = 0.8 * inc[5] / n_unemp as f64;
            for p in members.iter_mut().filter(|p| !p.employed) {
                p.unemployment_benefits = ub;
            }
        }

        let has_debt = net < 0.0 || rng.random::<f64>() < 0.4;
        let mut debt = if has_debt { Exp::new(1.0 / 40.0).expect("rate").sample(&mut rng) } else { 0.0 };
        if net < 0.0 {
            debt += -net;
        }
        let assets = net + debt;
        let owner = rng.random::<f64>() < 0.6;
        let aw = [
            if owner { 6.0 } else { 0.0 },
            if rng.random::<f64>() < 0.2 { 2.0 } else { 0.0 },
            if self_emp { 2.0 } else { 0.0 },
            if rng.random::<f64>() < 0.3 { 0.7 } else { 0.0 },
            if rng.random::<f64>() < 0.2 { 0.5 } else { 0.0 },
            if rng.random::<f64>() < 0.35 { 0.8 } else { 0.0 },
            1.5,
            0.3,
        ];
        let ashares = random_shares(&mut rng, &aw);
        let mut wealth = [0.0; 9];
        for k in 0..8 {
            wealth[k] = assets * ashares[k];
        }
        wealth[8] = debt;
        households.push(HouseholdRecord { household_id: hid, weight, income: inc, wealth });
        persons.extend(members);
    }
    (households, persons)
}

/// Series simulated for each country; `EA-spread` is derived later from
/// the cross-section of long rates.
pub const SYNTHETIC_SERIES: [&str; 8] = ["GDP", "HICP", "LCOMP", "UNEMP", "HP", "DJ50", "LT-IR", "ST-IR"];

/// Stable VAR(1) in transformed units (`100 ln` for log series).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroTruth {
    pub names: Vec<String>,
    pub a: DMatrix<f64>,
    pub intercept: DVector<f64>,
    pub sigma: DMatrix<f64>,
    pub mean: DVector<f64>,
}

impl MacroTruth {
    /// Persistent own dynamics; a higher short rate lowers activity and
    /// asset prices and raises unemployment and the long rate next quarter.
    pub fn standard(rng: &mut Rng) -> MacroTruth {
        let m = SYNTHETIC_SERIES.len();
        let own = [0.9, 0.92, 0.9, 0.9, 0.92, 0.85, 0.85, 0.9];
        let st = m - 1;
        let mut a = DMatrix::zeros(m, m);
        for i in 0..m {
            a[(i, i)] = own[i] + rng.random_range(-0.03..0.03);
        }
        let rate_effect = [-0.10, -0.05, -0.08, 0.30, -0.25, -1.5, 0.3];
        for (i, e) in rate_effect.iter().enumerate() {
            a[(i, st)] = e * (1.0 + rng.random_range(-0.2..0.2));
        }
        a[(3, 0)] = -0.05;
        a[(2, 0)] = 0.03;
        let mean = DVector::from_column_slice(&[
            100.0 * 100f64.ln(),
            100.0 * 100f64.ln(),
            100.0 * 30f64.ln(),
            100.0 * 8f64.ln(),
            100.0 * 100f64.ln(),
            100.0 * 3000f64.ln(),
            3.0 + rng.random_range(-0.5..1.5),
            2.0,
        ]);
        let sd = [0.6, 0.3, 0.5, 2.0, 1.0, 6.0, 0.25, 0.25];
        let sigma = DMatrix::from_fn(m, m, |i, j| sd[i] * sd[j] * if i == j { 1.0 } else { 0.2 });
        let intercept = (DMatrix::identity(m, m) - &a) * &mean;
        MacroTruth { names: SYNTHETIC_SERIES.iter().map(|s| s.to_string()).collect(), a, intercept, sigma, mean }
    }
}

pub fn simulate_macro(country: &str, truth: &MacroTruth, quarters: usize, seed: u64) -> Result<MacroPanel, BvarError> {
    let radius = spectral_radius(std::slice::from_ref(&truth.a));
    if radius >= 1.0 {
        return Err(BvarError::Unstable(radius));
    }
    let mut rng = rng_from_seed(derive_seed(seed, &["macro", country]));
    let y = simulate_var(std::slice::from_ref(&truth.a), &truth.intercept, &truth.sigma, quarters, 200, &mut rng)?;
    let mut dates = Vec::with_capacity(quarters);
    let mut q = Quarter { year: 1985, q: 1 };
    for _ in 0..quarters {
        dates.push(q);
        q = q.next();
    }
    let mut panel = MacroPanel { country: country.to_string(), dates, series: Default::default(), transformed: Default::default() };
    for (j, name) in truth.names.iter().enumerate() {
        panel.series.insert(name.clone(), y.column(j).iter().copied().collect());
        panel.transformed.insert(name.clone(), crate::data::is_log_series(name));
    }
    Ok(panel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{gini, sample_spearman};

    #[test]
    fn independent_copula_has_no_rank_correlation() {
        let mut rng = rng_from_seed(5);
        let m = SyntheticMargin::Exponential { rate: 1.0 };
        let pairs = gaussian_copula_pairs(&m, &m, 0.0, 10_000, &mut rng);
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let rho = sample_spearman(&a, &b, &vec![1.0; a.len()]).unwrap();
        assert!(rho.abs() < 0.03, "{rho}");
    }

    #[test]
    fn exponential_margin_gini() {
        let mut rng = rng_from_seed(9);
        let m = SyntheticMargin::Exponential { rate: 0.02 };
        let pairs = gaussian_copula_pairs(&m, &m, 0.5, 100_000, &mut rng);
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let g = gini(&x, &vec![1.0; x.len()]).unwrap();
        assert!((g - 0.5).abs() < 0.01, "{g}");
    }

    #[test]
    fn components_add_up() {
        let mut rng = rng_from_seed(1);
        let truth = country_truth(0, 0.5, &mut rng);
        let (hh, ps) = generate_households("AT", &truth, 300, 3);
        for h in &hh {
            assert!(h.wealth.iter().all(|v| *v >= 0.0));
            let emp: f64 = ps.iter().filter(|p| p.household_id == h.household_id).map(|p| p.employment_income).sum();
            if emp > 0.0 {
                assert!((emp - h.income[0]).abs() < 1e-9 * h.income[0].max(1.0));
            }
        }
        assert!(ps.iter().any(|p| !p.employed) && ps.iter().any(|p| p.employed));
    }

    #[test]
    fn unstable_truth_rejected() {
        let mut rng = rng_from_seed(2);
        let mut t = MacroTruth::standard(&mut rng);
        t.a[(0, 0)] = 1.2;
        assert!(matches!(simulate_macro("AT", &t, 50, 1), Err(BvarError::Unstable(_))));
    }
}
