//! Household microsimulation of monetary policy shocks.
//!
//! Each horizon starts from a fresh copy of the baseline panel: asset prices
//! and wages revalue portfolio components and labour income (direct channel),
//! then the unemployment response flips the employment status of the persons
//! ranked most (or least) likely to be employed (indirect channel).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bart::{fit_probit, fit_regression, BartError, BartSettings, CovariateEncoder};
use crate::bvar::IrfSet;
use crate::copula::{abscop_sample, moment_for, CopulaError, Functional};
use crate::data::{HouseholdRecord, PersonRecord};
use crate::marginals::{MarginalError, MarginalPosterior};
use crate::metrics::{pct_change, sample_spearman, MetricError, MetricReport};
use crate::rng::derive_seed;

#[derive(Debug, Error)]
pub enum MicrosimError {
    #[error("IRF set lacks variable `{0}`")]
    MissingVariable(String),
    #[error("IRF horizons {got} < requested {want}")]
    ShortIrf { got: usize, want: usize },
    #[error("non-finite delta at horizon {0}")]
    NonFinite(usize),
    #[error("person `{person}` references unknown household `{household}`")]
    UnknownHousehold { person: String, household: String },
    #[error("empty trajectory")]
    Empty,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Bart(#[from] BartError),
    #[error(transparent)]
    Marginal(#[from] MarginalError),
    #[error(transparent)]
    Copula(#[from] CopulaError),
}

/// Relative changes at one horizon. `unemployment` stays in the VAR's
/// `100 ln` units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HorizonDeltas {
    pub house: f64,
    pub stock: f64,
    pub bond: f64,
    pub wage: f64,
    pub unemployment: f64,
}

impl HorizonDeltas {
    fn is_finite(&self) -> bool {
        [self.house, self.stock, self.bond, self.wage, self.unemployment].iter().all(|v| v.is_finite())
    }
}

/// Deltas for horizons `1..=H` (index `h - 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfDeltas {
    pub horizons: Vec<HorizonDeltas>,
}

impl IrfDeltas {
    pub fn zeros(h: usize) -> Self {
        IrfDeltas { horizons: vec![HorizonDeltas::default(); h] }
    }

    pub fn len(&self) -> usize {
        self.horizons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.horizons.is_empty()
    }

    pub fn at(&self, h: usize) -> &HorizonDeltas {
        &self.horizons[h - 1]
    }

    /// From median IRF paths: log series via `exp(r / 100) - 1`; bond prices
    /// from the long rate by modified duration, `-D * dLT / 100`.
    pub fn from_irf(irf: &IrfSet, horizons: usize, bond_duration: f64) -> Result<Self, MicrosimError> {
        if irf.horizons < horizons {
            return Err(MicrosimError::ShortIrf { got: irf.horizons, want: horizons });
        }
        let path = |name: &str| irf.median_path(name).ok_or_else(|| MicrosimError::MissingVariable(name.to_string()));
        let (hp, dj, lt, lc, un) = (path("HP")?, path("DJ50")?, path("LT-IR")?, path("LCOMP")?, path("UNEMP")?);
        let rel = |r: f64| (r / 100.0).exp() - 1.0;
        let out: Vec<HorizonDeltas> = (1..=horizons)
            .map(|h| HorizonDeltas {
                house: rel(hp[h]),
                stock: rel(dj[h]),
                bond: -bond_duration * lt[h] / 100.0,
                wage: rel(lc[h]),
                unemployment: un[h],
            })
            .collect();
        if let Some(h) = out.iter().position(|d| !d.is_finite()) {
            return Err(MicrosimError::NonFinite(h + 1));
        }
        Ok(IrfDeltas { horizons: out })
    }
}

/// Direct channel: revalue real estate, shares and bonds; scale employment
/// and self-employment income by the wage change. Everything else is left
/// untouched.
pub fn apply_direct(panel: &[HouseholdRecord], d: &HorizonDeltas) -> Vec<HouseholdRecord> {
    panel
        .iter()
        .map(|h| {
            let mut h = h.clone();
            h.wealth[0] *= 1.0 + d.house;
            h.wealth[1] *= 1.0 + d.house;
            h.wealth[3] *= 1.0 + d.stock;
            h.wealth[4] *= 1.0 + d.bond;
            h.income[0] *= 1.0 + d.wage;
            h.income[1] *= 1.0 + d.wage;
            h
        })
        .collect()
}

/// Baseline employment probabilities and imputed incomes for every person.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmploymentModel {
    pub p_employed: Vec<f64>,
    pub imputed_income: Vec<f64>,
}

impl EmploymentModel {
    /// Fit the probit ensemble on employment status and the income ensemble
    /// on employed persons, then predict for everybody.
    pub fn fit(persons: &[PersonRecord], settings: &BartSettings, seed: u64) -> Result<Self, MicrosimError> {
        let enc = CovariateEncoder::fit(persons);
        let x = enc.encode_all(persons);
        let z: Vec<bool> = persons.iter().map(|p| p.employed).collect();
        let pb = fit_probit(&x, &z, settings, derive_seed(seed, &["pbart"]))?;
        let emp: Vec<usize> = (0..persons.len()).filter(|&i| persons[i].employed).collect();
        let xe: Vec<Vec<f64>> = emp.iter().map(|&i| x[i].clone()).collect();
        let ye: Vec<f64> = emp.iter().map(|&i| persons[i].employment_income).collect();
        let reg = fit_regression(&xe, &ye, settings, derive_seed(seed, &["bart"]))?;
        Ok(EmploymentModel {
            p_employed: pb.predict(&x)?,
            imputed_income: reg.predict(&x)?.into_iter().map(|v| v.max(0.0)).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Number of persons the unemployment response asks for.
    pub requested: usize,
    /// Person ids actually flipped, in rank order.
    pub flipped: Vec<String>,
    /// `true` when flips go from unemployed to employed.
    pub to_employed: bool,
}

/// `round(|exp(du / 100) - 1| * weighted unemployed / mean person weight)`.
pub fn persons_to_flip(persons: &[PersonRecord], weights: &HashMap<&str, f64>, du: f64) -> usize {
    if du == 0.0 || persons.is_empty() {
        return 0;
    }
    let w = |p: &PersonRecord| weights.get(p.household_id.as_str()).copied().unwrap_or(0.0);
    let unemployed: f64 = persons.iter().filter(|p| !p.employed).map(w).sum();
    let mean_w = persons.iter().map(w).sum::<f64>() / persons.len() as f64;
    if mean_w <= 0.0 {
        return 0;
    }
    (((du / 100.0).exp() - 1.0).abs() * unemployed / mean_w).round() as usize
}

/// Indirect channel. A fall in unemployment employs the highest-probability
/// unemployed persons at their imputed income and drops their benefits; a
/// rise lays off the lowest-probability employed persons, who then receive
/// `replacement_rate` times their employment income. Changes are added to
/// the household income components.
pub fn apply_employment_transition(
    persons: &mut [PersonRecord],
    panel: &mut [HouseholdRecord],
    du: f64,
    model: &EmploymentModel,
    replacement_rate: f64,
) -> Result<Transition, MicrosimError> {
    let index: HashMap<String, usize> = panel.iter().enumerate().map(|(i, h)| (h.household_id.clone(), i)).collect();
    let weights: HashMap<&str, f64> = panel.iter().map(|h| (h.household_id.as_str(), h.weight)).collect();
    let requested = persons_to_flip(persons, &weights, du);
    let to_employed = du < 0.0;
    if requested == 0 {
        return Ok(Transition { requested, flipped: Vec::new(), to_employed });
    }
    let mut pool: Vec<usize> = (0..persons.len()).filter(|&i| persons[i].employed != to_employed).collect();
    if to_employed {
        pool.sort_by(|&a, &b| model.p_employed[b].total_cmp(&model.p_employed[a]));
    } else {
        pool.sort_by(|&a, &b| model.p_employed[a].total_cmp(&model.p_employed[b]));
    }
    if requested > pool.len() {
        log::warn!("{requested} employment flips requested but only {} eligible", pool.len());
    }
    let mut flipped = Vec::new();
    for &i in pool.iter().take(requested) {
        let p = &mut persons[i];
        let hh = *index.get(&p.household_id).ok_or_else(|| MicrosimError::UnknownHousehold {
            person: p.person_id.clone(),
            household: p.household_id.clone(),
        })?;
        let (old_inc, old_ben) = (p.employment_income, p.unemployment_benefits);
        if to_employed {
            p.employed = true;
            p.employment_income = model.imputed_income[i];
            p.unemployment_benefits = 0.0;
        } else {
            p.employed = false;
            p.employment_income = 0.0;
            p.unemployment_benefits = replacement_rate * old_inc;
        }
        panel[hh].income[0] += p.employment_income - old_inc;
        panel[hh].income[5] += p.unemployment_benefits - old_ben;
        flipped.push(p.person_id.clone());
    }
    Ok(Transition { requested, flipped, to_employed })
}

/// Source of Spearman's rho for the trajectories.
pub trait RhoEstimator: Sync {
    fn rho(&self, panel: &[HouseholdRecord]) -> Result<f64, MicrosimError>;
}

/// Weighted sample Spearman's rho of total income and net wealth.
pub struct PlugInRho;

impl RhoEstimator for PlugInRho {
    fn rho(&self, panel: &[HouseholdRecord]) -> Result<f64, MicrosimError> {
        let x1: Vec<f64> = panel.iter().map(|h| h.total_income()).collect();
        let x2: Vec<f64> = panel.iter().map(|h| h.net_wealth()).collect();
        let w: Vec<f64> = panel.iter().map(|h| h.weight).collect();
        Ok(sample_spearman(&x1, &x2, &w)?)
    }
}

/// Posterior median of rho by ABSCop on the current panel, with the
/// marginal posteriors held at their baseline fits. The proposal seed is
/// fixed, so the estimate moves only through the pseudo-data.
pub struct AbscopRho {
    pub income: MarginalPosterior,
    pub wealth: MarginalPosterior,
    pub proposals: usize,
    pub seed: u64,
}

impl RhoEstimator for AbscopRho {
    fn rho(&self, panel: &[HouseholdRecord]) -> Result<f64, MicrosimError> {
        let rows: Vec<&HouseholdRecord> = panel.iter().filter(|h| h.total_income() > 0.0).collect();
        let x1: Vec<f64> = rows.iter().map(|h| h.total_income()).collect();
        let x2: Vec<f64> = rows.iter().map(|h| h.net_wealth()).collect();
        let post = abscop_sample(&moment_for(Functional::SpearmanRho), &self.income, &self.wealth, &x1, &x2, self.proposals, self.seed)?;
        Ok(post.median)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub horizons: usize,
    pub replacement_rate: f64,
}

/// Tracked metrics, in output order.
pub const TRACKED: [&str; 6] = ["gini_income", "gini_net_wealth", "gini_wealth", "gini_debt", "gini_bivariate", "spearman_rho"];

fn tracked_values(r: &MetricReport) -> [f64; 6] {
    [r.gini_income, r.gini_net_wealth, r.gini_wealth, r.gini_debt, r.gini_bivariate, r.spearman_rho]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationState {
    pub horizon: usize,
    pub households: Vec<HouseholdRecord>,
    pub transition: Transition,
    pub metrics: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRun {
    pub shock: String,
    pub baseline: MetricReport,
    pub states: Vec<SimulationState>,
    /// `[metric][h - 1]` percent changes against the baseline, metrics in
    /// [`TRACKED`] order.
    pub trajectories: Vec<Vec<f64>>,
}

impl SimulationRun {
    pub fn trajectory(&self, metric: &str) -> Option<&[f64]> {
        TRACKED.iter().position(|m| *m == metric).map(|i| self.trajectories[i].as_slice())
    }
}

/// Metrics of the baseline panel with rho from `rho`.
pub fn baseline_metrics(panel: &[HouseholdRecord], rho: &dyn RhoEstimator) -> Result<MetricReport, MicrosimError> {
    let mut m = MetricReport::compute(panel, None)?;
    m.spearman_rho = rho.rho(panel)?;
    Ok(m)
}

/// State at horizon `h`: a pure function of the baseline and the deltas at `h`.
pub fn simulate_horizon(
    panel: &[HouseholdRecord],
    persons: &[PersonRecord],
    h: usize,
    d: &HorizonDeltas,
    model: &EmploymentModel,
    cfg: &SimulationConfig,
    rho: &dyn RhoEstimator,
) -> Result<SimulationState, MicrosimError> {
    let mut households = apply_direct(panel, d);
    let mut people = persons.to_vec();
    for p in people.iter_mut() {
        p.employment_income *= 1.0 + d.wage;
    }
    let transition = apply_employment_transition(&mut people, &mut households, d.unemployment, model, cfg.replacement_rate)?;
    let mut metrics = MetricReport::compute(&households, None)?;
    metrics.spearman_rho = rho.rho(&households)?;
    Ok(SimulationState { horizon: h, households, transition, metrics })
}

/// Run all horizons for one shock.
pub fn run_simulation(
    shock: &str,
    panel: &[HouseholdRecord],
    persons: &[PersonRecord],
    deltas: &IrfDeltas,
    model: &EmploymentModel,
    cfg: &SimulationConfig,
    rho: &dyn RhoEstimator,
    baseline: &MetricReport,
) -> Result<SimulationRun, MicrosimError> {
    if deltas.len() < cfg.horizons {
        return Err(MicrosimError::ShortIrf { got: deltas.len(), want: cfg.horizons });
    }
    let states: Vec<SimulationState> = (1..=cfg.horizons)
        .map(|h| simulate_horizon(panel, persons, h, deltas.at(h), model, cfg, rho))
        .collect::<Result<_, _>>()?;
    let base = tracked_values(baseline);
    let mut trajectories = vec![Vec::with_capacity(cfg.horizons); TRACKED.len()];
    for s in &states {
        for (k, v) in tracked_values(&s.metrics).iter().enumerate() {
            trajectories[k].push(pct_change(base[k], *v));
        }
    }
    Ok(SimulationRun { shock: shock.to_string(), baseline: *baseline, states, trajectories })
}

/// Entry with the largest absolute value, sign kept; ties go to the earliest.
pub fn peak_response(trajectory: &[f64]) -> Result<f64, MicrosimError> {
    let first = *trajectory.first().ok_or(MicrosimError::Empty)?;
    Ok(trajectory.iter().skip(1).fold(first, |best, &v| if v.abs() > best.abs() { v } else { best }))
}

/// Columns `shock, metric, horizon, pct_change`.
pub fn write_trajectories<W: std::io::Write>(w: W, runs: &[SimulationRun]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["shock", "metric", "horizon", "pct_change"])?;
    for run in runs {
        for (k, m) in TRACKED.iter().enumerate() {
            for (h, v) in run.trajectories[k].iter().enumerate() {
                wtr.write_record([run.shock.as_str(), m, &(h + 1).to_string(), &format!("{v:.8}")])?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}
