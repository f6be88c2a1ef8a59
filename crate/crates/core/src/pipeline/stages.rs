use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::synthetic::{country_truth, generate_households, simulate_macro, HouseholdTruth, MacroTruth};
use super::{read_json, write_json, write_with, BoxError, Pipeline, PipelineError, Stage};
use crate::bart::BartSettings;
use crate::bvar::{gibbs_fit, irf, pca_spread, BvarChain, BvarPrior, IrfSet, Shock, VarSpec};
use crate::config::DependenceMode;
use crate::copula::{abscop_sample, moment_for, DependenceSummary, Functional};
use crate::data::{load_households, load_macro_panel, load_persons, write_households, write_macro_panel, write_persons, MacroPanel};
use crate::data::{HouseholdRecord, PersonRecord};
use crate::marginals::{information_criteria, rwmh_fit, ChainConfig, FamilyTag, MarginalPosterior, PriorSpec, SelectionTable};
use crate::marginals::{INCOME_FAMILIES, WEALTH_FAMILIES};
use crate::metrics::{write_reports, MetricReport};
use crate::microsim::{
    baseline_metrics, peak_response, run_simulation, write_trajectories, AbscopRho, EmploymentModel, IrfDeltas, PlugInRho,
    RhoEstimator, SimulationConfig, SimulationRun, TRACKED,
};
use crate::regression::{country_features, exploratory_regressions, CountryFeatureTable, FEATURES};
use crate::rng::{derive_seed, rng_from_seed};
use crate::svg::{heat_map, write_line_chart, Series};

const MARGINS: [&str; 2] = ["income", "net_wealth"];

fn families(margin: &str) -> [FamilyTag; 2] {
    if margin == "income" {
        INCOME_FAMILIES
    } else {
        WEALTH_FAMILIES
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Truth {
    households: HouseholdTruth,
    macro_var: MacroTruth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DependenceFile {
    income_family: FamilyTag,
    wealth_family: FamilyTag,
    functionals: BTreeMap<String, DependenceSummary>,
    low_ess: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TransitionRow {
    horizon: usize,
    requested: usize,
    flipped: usize,
    to_employed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ShockSummary {
    shock: String,
    trajectories: BTreeMap<String, Vec<f64>>,
    peaks: BTreeMap<String, f64>,
    transitions: Vec<TransitionRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SimulationSummary {
    baseline: MetricReport,
    shocks: Vec<ShockSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakRow {
    pub country: String,
    pub shock: String,
    pub metric: String,
    pub peak: f64,
}

/// Peak responses per country, shock and metric, read from the simulation
/// summaries under `root`.
pub fn peaks_table(root: &std::path::Path, countries: &[String]) -> Result<Vec<PeakRow>, BoxError> {
    let mut rows = Vec::new();
    for c in countries {
        let s: SimulationSummary = read_json(&root.join(Stage::Simulate.name()).join(c).join("summary.json"))?;
        for sh in &s.shocks {
            for m in TRACKED {
                rows.push(PeakRow { country: c.clone(), shock: sh.shock.clone(), metric: m.to_string(), peak: sh.peaks[m] });
            }
        }
    }
    Ok(rows)
}

fn chain_of(p: &Pipeline) -> ChainConfig {
    let m = &p.config.marginals;
    ChainConfig::short(m.iterations, m.burn_in, m.thin)
}

fn prior_of(p: &Pipeline) -> PriorSpec {
    let m = &p.config.marginals;
    PriorSpec { ig_shape: m.ig_shape, ig_scale: m.ig_scale, normal_sd: m.normal_sd, ..Default::default() }
}

/// Income fitting uses strictly positive totals; pseudo-data pairs use the
/// same households.
fn margin_data(households: &[HouseholdRecord]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let income: Vec<f64> = households.iter().map(|h| h.total_income()).filter(|v| *v > 0.0).collect();
    let wealth_all: Vec<f64> = households.iter().map(|h| h.net_wealth()).collect();
    let wealth_pos: Vec<f64> = households.iter().filter(|h| h.total_income() > 0.0).map(|h| h.net_wealth()).collect();
    (income, wealth_all, wealth_pos)
}

impl Pipeline {
    fn households(&self, country: &str) -> Result<Vec<HouseholdRecord>, BoxError> {
        let load = load_households(&self.country_file(country, "households.csv"), &self.config.data.households)?;
        if !load.negative_income.is_empty() {
            log::warn!("{country}: {} households with negative income", load.negative_income.len());
        }
        Ok(load.households)
    }

    fn persons(&self, country: &str) -> Result<Vec<PersonRecord>, BoxError> {
        Ok(load_persons(&self.country_file(country, "persons.csv"), &self.config.data.persons)?)
    }

    pub(super) fn generate_synthetic(&mut self) -> Result<(), PipelineError> {
        let countries: Vec<String> = self
            .config
            .synthetic
            .countries
            .iter()
            .filter(|c| self.countries_filter.is_empty() || self.countries_filter.contains(c))
            .cloned()
            .collect();
        let units: Vec<(String, Vec<PathBuf>)> =
            countries.iter().map(|c| (format!("{}/{c}", Stage::GenerateSynthetic.name()), Vec::new())).collect();
        self.units_parallel(Stage::GenerateSynthetic, units, |p, key| {
            let country = key.rsplit('/').next().unwrap_or(key);
            let index = p.config.synthetic.countries.iter().position(|c| c == country).unwrap_or(0);
            let seed = p.seed(Stage::GenerateSynthetic, country);
            let mut rng = rng_from_seed(derive_seed(seed, &["truth"]));
            let hh_truth = country_truth(index, p.config.synthetic.copula_r, &mut rng);
            let macro_truth = MacroTruth::standard(&mut rng);
            let (households, persons) = generate_households(country, &hh_truth, p.config.synthetic.households, seed);
            let panel = simulate_macro(country, &macro_truth, p.config.synthetic.quarters, seed)?;
            let dir = p.input_dir().join(country);
            std::fs::create_dir_all(&dir)?;
            let files = [dir.join("households.csv"), dir.join("persons.csv"), dir.join("macro.csv"), dir.join("truth.json")];
            write_households(&files[0], &households, &p.config.data.households)?;
            write_persons(&files[1], &persons, &p.config.data.persons)?;
            write_macro_panel(&files[2], &panel)?;
            write_json(&files[3], &Truth { households: hh_truth, macro_var: macro_truth })?;
            Ok(files.to_vec())
        })?;
        Ok(())
    }

    fn posterior_path(&self, country: &str, margin: &str, fam: FamilyTag) -> PathBuf {
        self.out_dir(Stage::FitMarginals, Some(country)).join(format!("{margin}_{}.json", fam.name()))
    }

    fn require(&self, country: &str, stage: Stage) -> Result<Vec<String>, PipelineError> {
        let countries = self.countries();
        if countries.is_empty() {
            return Err(PipelineError::new(stage.name(), format!("no input data under {}", self.input_dir().display())));
        }
        for c in &countries {
            if !self.country_file(c, country).is_file() {
                return Err(PipelineError::new(
                    stage.name(),
                    format!("stage dependency missing: {}", self.country_file(c, country).display()),
                ));
            }
        }
        Ok(countries)
    }

    pub(super) fn fit_marginals(&mut self) -> Result<(), PipelineError> {
        let stage = Stage::FitMarginals;
        let countries = self.require("households.csv", stage)?;
        let units = countries
            .iter()
            .map(|c| (format!("{}/{c}", stage.name()), vec![self.country_file(c, "households.csv")]))
            .collect();
        self.units_parallel(stage, units, |p, key| {
            let country = key.rsplit('/').next().unwrap_or(key);
            let households = p.households(country)?;
            let (income, wealth, _) = margin_data(&households);
            let seed = p.seed(stage, country);
            let (chain, prior) = (chain_of(p), prior_of(p));
            let jobs: Vec<(&str, FamilyTag)> = MARGINS.iter().flat_map(|m| families(m).map(|f| (*m, f))).collect();
            let fits: Vec<Result<(&str, FamilyTag, MarginalPosterior), BoxError>> = jobs
                .par_iter()
                .map(|&(margin, fam)| {
                    let data = if margin == "income" { &income } else { &wealth };
                    let post = rwmh_fit(data, fam, &prior, &chain, derive_seed(seed, &[margin, fam.name()]))?;
                    Ok((margin, fam, post))
                })
                .collect();
            let dir = p.out_dir(stage, Some(country));
            std::fs::create_dir_all(&dir)?;
            let mut table = SelectionTable::default();
            let mut out = Vec::new();
            for r in fits {
                let (margin, fam, post) = r?;
                let data = if margin == "income" { &income } else { &wealth };
                table.push(country, margin, fam, information_criteria(&post, data));
                let path = p.posterior_path(country, margin, fam);
                write_json(&path, &post)?;
                out.push(path);
                let csv_path = dir.join(format!("{margin}_{}_draws.csv", fam.name()));
                write_with(&csv_path, |b| Ok(post.write_csv(b)?))?;
                out.push(csv_path);
            }
            let sel = dir.join("selection.json");
            write_json(&sel, &table)?;
            out.push(sel);
            let sel_csv = dir.join("selection.csv");
            write_with(&sel_csv, |b| Ok(table.write_csv(b)?))?;
            out.push(sel_csv);
            Ok(out)
        })?;
        let mut all = SelectionTable::default();
        for c in &countries {
            let t: SelectionTable = read_json(&self.out_dir(stage, Some(c)).join("selection.json")).map_err(|e| PipelineError::new(stage.name(), e))?;
            all.rows.extend(t.rows);
        }
        write_with(&self.out_dir(stage, None).join("selection.csv"), |b| Ok(all.write_csv(b)?))
            .map_err(|e| PipelineError::new(stage.name(), e))
    }

    fn selected(&self, country: &str) -> Result<(FamilyTag, FamilyTag), BoxError> {
        let t: SelectionTable = read_json(&self.out_dir(Stage::FitMarginals, Some(country)).join("selection.json"))?;
        let by_bic = self.config.marginals.select_by_bic;
        let inc = t.selected(country, "income", by_bic).ok_or("no income family selected")?;
        let wea = t.selected(country, "net_wealth", by_bic).ok_or("no wealth family selected")?;
        Ok((inc, wea))
    }

    fn marginal_inputs(&self, country: &str) -> Vec<PathBuf> {
        let mut v = vec![self.out_dir(Stage::FitMarginals, Some(country)).join("selection.json")];
        for m in MARGINS {
            for f in families(m) {
                v.push(self.posterior_path(country, m, f));
            }
        }
        v
    }

    pub(super) fn dependence(&mut self) -> Result<(), PipelineError> {
        let stage = Stage::Dependence;
        let countries = self.require("households.csv", stage)?;
        let units = countries
            .iter()
            .map(|c| {
                let mut inputs = vec![self.country_file(c, "households.csv")];
                inputs.extend(self.marginal_inputs(c));
                (format!("{}/{c}", stage.name()), inputs)
            })
            .collect();
        self.units_parallel(stage, units, |p, key| {
            let country = key.rsplit('/').next().unwrap_or(key);
            let households = p.households(country)?;
            let (income, _, wealth) = margin_data(&households);
            let (fi, fw) = p.selected(country)?;
            let pi: MarginalPosterior = read_json(&p.posterior_path(country, "income", fi))?;
            let pw: MarginalPosterior = read_json(&p.posterior_path(country, "net_wealth", fw))?;
            let seed = p.seed(stage, country);
            let cc = &p.config.copula;
            let dir = p.out_dir(stage, Some(country));
            std::fs::create_dir_all(&dir)?;
            let mut file = DependenceFile { income_family: fi, wealth_family: fw, functionals: BTreeMap::new(), low_ess: BTreeMap::new() };
            let mut out = Vec::new();
            for f in [Functional::SpearmanRho, Functional::UpperTail(cc.tail_upper), Functional::LowerTail(cc.tail_lower)] {
                let post = abscop_sample(&moment_for(f), &pi, &pw, &income, &wealth, cc.proposals, derive_seed(seed, &[f.name()]))?;
                if post.low_ess {
                    log::warn!("{country}: low effective sample size for {} ({:.0})", f.name(), post.ess);
                }
                let path = dir.join(format!("{}_draws.csv", f.name()));
                write_with(&path, |b| Ok(post.write_draws_csv(b)?))?;
                out.push(path);
                file.functionals.insert(f.name().to_string(), post.summary());
                file.low_ess.insert(f.name().to_string(), post.low_ess);
            }
            let summary = dir.join("summary.json");
            write_json(&summary, &file)?;
            out.push(summary);
            let sample = MetricReport::compute(&households, Some((cc.tail_upper, cc.tail_lower)))?;
            let sample_path = dir.join("sample_metrics.json");
            write_json(&sample_path, &sample)?;
            out.push(sample_path);
            Ok(out)
        })?;
        Ok(())
    }

    /// The country's panel, with the spread factor added from the
    /// cross-section of long rates when it is not supplied.
    fn macro_panel(&self, country: &str) -> Result<MacroPanel, BoxError> {
        let mut panel = load_macro_panel(&self.country_file(country, "macro.csv"))?;
        if panel.get("EA-spread").is_some() {
            return Ok(panel);
        }
        let bench = &self.config.bvar.spread_benchmark;
        let others: Vec<String> = self.available_countries().into_iter().filter(|c| self.country_file(c, "macro.csv").is_file()).collect();
        if !others.contains(bench) {
            return Err(format!("EA-spread missing and benchmark country `{bench}` has no macro panel").into());
        }
        let panels: Vec<MacroPanel> = others.iter().map(|c| load_macro_panel(&self.country_file(c, "macro.csv"))).collect::<Result<_, _>>()?;
        let start = panels.iter().map(|p| p.dates[0]).max().ok_or("no panels")?;
        let end = panels.iter().map(|p| *p.dates.last().expect("non-empty")).min().ok_or("no panels")?;
        if start > end {
            return Err("macro panels share no common quarters".into());
        }
        let window = |p: &MacroPanel| -> Result<Vec<f64>, BoxError> {
            let i0 = p.dates.iter().position(|d| *d == start).ok_or("date misalignment")?;
            let i1 = p.dates.iter().position(|d| *d == end).ok_or("date misalignment")?;
            let lt = p.get("LT-IR").ok_or_else(|| format!("{}: LT-IR missing", p.country))?;
            Ok(lt[i0..=i1].to_vec())
        };
        let mut bench_rate = Vec::new();
        let mut rates = Vec::new();
        for (c, p) in others.iter().zip(&panels) {
            if c == bench {
                bench_rate = window(p)?;
            } else {
                rates.push(window(p)?);
            }
        }
        let factor = pca_spread(&rates, &bench_rate)?;
        let i0 = panel.dates.iter().position(|d| *d == start).ok_or("date misalignment")?;
        let i1 = panel.dates.iter().position(|d| *d == end).ok_or("date misalignment")?;
        panel.dates = panel.dates[i0..=i1].to_vec();
        for v in panel.series.values_mut() {
            *v = v[i0..=i1].to_vec();
        }
        panel.series.insert("EA-spread".into(), factor.factor);
        panel.transformed.insert("EA-spread".into(), false);
        Ok(panel)
    }

    pub(super) fn bvar(&mut self) -> Result<(), PipelineError> {
        let stage = Stage::Bvar;
        let countries = self.require("macro.csv", stage)?;
        let all_macro: Vec<PathBuf> = self
            .available_countries()
            .iter()
            .map(|c| self.country_file(c, "macro.csv"))
            .filter(|p| p.is_file())
            .collect();
        let units = countries.iter().map(|c| (format!("{}/{c}", stage.name()), all_macro.clone())).collect();
        self.units_parallel(stage, units, |p, key| {
            let country = key.rsplit('/').next().unwrap_or(key);
            let panel = p.macro_panel(country)?;
            let bc = &p.config.bvar;
            let spec = VarSpec::new(&bc.ordering, bc.lags);
            let chain = BvarChain { iterations: bc.iterations, burn_in: bc.burn_in, thin: bc.thin };
            let draws = gibbs_fit(&panel, &spec, &BvarPrior::default(), &chain, p.seed(stage, country))?;
            let dir = p.out_dir(stage, Some(country));
            std::fs::create_dir_all(&dir)?;
            let mut out = Vec::new();
            let spread = dir.join("ea_spread.csv");
            write_with(&spread, |b| {
                let mut w = csv::Writer::from_writer(b);
                w.write_record(["date", "EA-spread"])?;
                for (d, v) in panel.dates.iter().zip(panel.get("EA-spread").unwrap_or(&[])) {
                    w.write_record([d.to_string(), format!("{v:.10}")])?;
                }
                w.flush()?;
                Ok(())
            })?;
            out.push(spread);
            let dpath = dir.join("draws.json");
            write_json(&dpath, &draws)?;
            out.push(dpath);
            for shock in Shock::ALL {
                let set = irf(&draws, shock.variable(), bc.horizons, 1.0)?;
                if !set.excluded.is_empty() {
                    log::warn!("{country}: {} explosive draws excluded from the {} IRF", set.excluded.len(), shock.name());
                }
                let j = dir.join(format!("irf_{}.json", shock.name()));
                write_json(&j, &set)?;
                let c = dir.join(format!("irf_{}.csv", shock.name()));
                write_with(&c, |b| Ok(set.write_csv(b)?))?;
                out.extend([j, c]);
                for (i, var) in set.variables.iter().enumerate() {
                    let x: Vec<f64> = (0..=set.horizons).map(|h| h as f64).collect();
                    let series = Series {
                        name: var.clone(),
                        x,
                        y: set.median[i].clone(),
                        band: Some((set.lo68[i].clone(), set.hi68[i].clone())),
                    };
                    let stem = format!("irf_{}_{}", shock.name(), var.to_lowercase().replace('-', "_"));
                    let title = format!("{country}: {} shock, response of {var}", shock.name());
                    write_line_chart(&dir, &stem, &title, "quarter", "response", &[series])?;
                    out.push(dir.join(format!("{stem}.svg")));
                    out.push(dir.join(format!("{stem}.csv")));
                }
            }
            Ok(out)
        })?;
        Ok(())
    }

    pub(super) fn simulate(&mut self) -> Result<(), PipelineError> {
        let stage = Stage::Simulate;
        let countries = self.require("persons.csv", stage)?;
        let units = countries
            .iter()
            .map(|c| {
                let bdir = self.out_dir(Stage::Bvar, Some(c));
                let mut inputs = vec![self.country_file(c, "households.csv"), self.country_file(c, "persons.csv")];
                inputs.extend(self.marginal_inputs(c));
                inputs.extend(Shock::ALL.iter().map(|s| bdir.join(format!("irf_{}.json", s.name()))));
                (format!("{}/{c}", stage.name()), inputs)
            })
            .collect();
        self.units_parallel(stage, units, |p, key| {
            let country = key.rsplit('/').next().unwrap_or(key);
            let households = p.households(country)?;
            let persons = p.persons(country)?;
            let seed = p.seed(stage, country);
            let dir = p.out_dir(stage, Some(country));
            std::fs::create_dir_all(&dir)?;
            let mut out = Vec::new();

            let model = EmploymentModel::fit(&persons, &BartSettings::from(&p.config.bart), derive_seed(seed, &["employment"]))?;
            let mpath = dir.join("employment_model.json");
            write_json(&mpath, &model)?;
            out.push(mpath);

            let cc = &p.config.copula;
            let rho: Box<dyn RhoEstimator> = match cc.simulation_mode {
                DependenceMode::PlugIn => Box::new(PlugInRho),
                DependenceMode::Posterior => {
                    let (fi, fw) = p.selected(country)?;
                    Box::new(AbscopRho {
                        income: read_json(&p.posterior_path(country, "income", fi))?,
                        wealth: read_json(&p.posterior_path(country, "net_wealth", fw))?,
                        proposals: cc.simulation_proposals,
                        seed: derive_seed(seed, &["rho"]),
                    })
                }
            };
            let baseline = baseline_metrics(&households, rho.as_ref())?;
            let cfg = SimulationConfig { horizons: p.config.bvar.horizons, replacement_rate: p.config.microsim.replacement_for(country) };
            let mut runs: Vec<SimulationRun> = Vec::new();
            for shock in Shock::ALL {
                let set: IrfSet = read_json(&p.out_dir(Stage::Bvar, Some(country)).join(format!("irf_{}.json", shock.name())))?;
                let deltas = IrfDeltas::from_irf(&set, cfg.horizons, p.config.microsim.bond_duration)?;
                runs.push(run_simulation(shock.name(), &households, &persons, &deltas, &model, &cfg, rho.as_ref(), &baseline)?);
            }
            let tpath = dir.join("trajectories.csv");
            write_with(&tpath, |b| Ok(write_trajectories(b, &runs)?))?;
            out.push(tpath);

            let mut shocks = Vec::new();
            for run in &runs {
                let mut trajectories = BTreeMap::new();
                let mut peaks = BTreeMap::new();
                for (k, m) in TRACKED.iter().enumerate() {
                    trajectories.insert(m.to_string(), run.trajectories[k].clone());
                    peaks.insert(m.to_string(), peak_response(&run.trajectories[k])?);
                }
                let transitions = run
                    .states
                    .iter()
                    .map(|s| TransitionRow {
                        horizon: s.horizon,
                        requested: s.transition.requested,
                        flipped: s.transition.flipped.len(),
                        to_employed: s.transition.to_employed,
                    })
                    .collect();
                let x: Vec<f64> = (1..=cfg.horizons).map(|h| h as f64).collect();
                let series: Vec<Series> =
                    TRACKED.iter().enumerate().map(|(k, m)| Series::line(m, x.clone(), run.trajectories[k].clone())).collect();
                let stem = format!("trajectories_{}", run.shock);
                let title = format!("{country}: {} shock", run.shock);
                write_line_chart(&dir, &stem, &title, "quarter", "% change vs baseline", &series)?;
                out.push(dir.join(format!("{stem}.svg")));
                out.push(dir.join(format!("{stem}.csv")));
                shocks.push(ShockSummary { shock: run.shock.clone(), trajectories, peaks, transitions });
            }
            let spath = dir.join("summary.json");
            write_json(&spath, &SimulationSummary { baseline, shocks })?;
            out.push(spath);
            Ok(out)
        })?;
        Ok(())
    }

    pub(super) fn report(&mut self) -> Result<(), PipelineError> {
        let stage = Stage::Report;
        let countries = self.require("persons.csv", stage)?;
        let mut inputs = Vec::new();
        for c in &countries {
            inputs.push(self.country_file(c, "households.csv"));
            inputs.push(self.country_file(c, "persons.csv"));
            inputs.push(self.out_dir(Stage::FitMarginals, Some(c)).join("selection.json"));
            inputs.push(self.out_dir(Stage::Dependence, Some(c)).join("summary.json"));
            inputs.push(self.out_dir(Stage::Dependence, Some(c)).join("sample_metrics.json"));
            inputs.push(self.out_dir(Stage::Simulate, Some(c)).join("summary.json"));
            for s in Shock::ALL {
                inputs.push(self.out_dir(Stage::Bvar, Some(c)).join(format!("irf_{}.csv", s.name())));
            }
        }
        let countries_ref = &countries;
        self.unit(stage, stage.name(), &inputs, move |p| p.write_report(countries_ref))?;
        Ok(())
    }

    fn write_report(&self, countries: &[String]) -> Result<Vec<PathBuf>, BoxError> {
        let dir = self.out_dir(Stage::Report, None);
        std::fs::create_dir_all(&dir)?;
        let mut out = Vec::new();

        let mut sample_rows = Vec::new();
        let mut dep = BTreeMap::new();
        let mut sims = BTreeMap::new();
        let mut selection = SelectionTable::default();
        for c in countries {
            let m: MetricReport = read_json(&self.out_dir(Stage::Dependence, Some(c)).join("sample_metrics.json"))?;
            sample_rows.push((c.clone(), m));
            let d: DependenceFile = read_json(&self.out_dir(Stage::Dependence, Some(c)).join("summary.json"))?;
            dep.insert(c.clone(), d);
            let s: SimulationSummary = read_json(&self.out_dir(Stage::Simulate, Some(c)).join("summary.json"))?;
            sims.insert(c.clone(), s);
            let t: SelectionTable = read_json(&self.out_dir(Stage::FitMarginals, Some(c)).join("selection.json"))?;
            selection.rows.extend(t.rows);
        }

        let path = dir.join("sample_metrics.csv");
        write_with(&path, |b| Ok(write_reports(b, &sample_rows)?))?;
        out.push(path);
        let path = dir.join("selection.csv");
        write_with(&path, |b| Ok(selection.write_csv(b)?))?;
        out.push(path);

        let path = dir.join("dependence.csv");
        write_with(&path, |b| {
            let mut w = csv::Writer::from_writer(b);
            w.write_record(["country", "functional", "income_family", "wealth_family", "median", "lo68", "hi68", "ess", "low_ess"])?;
            for (c, d) in &dep {
                for (name, s) in &d.functionals {
                    w.write_record([
                        c.clone(),
                        name.clone(),
                        d.income_family.name().to_string(),
                        d.wealth_family.name().to_string(),
                        format!("{:.6}", s.median),
                        format!("{:.6}", s.lo68),
                        format!("{:.6}", s.hi68),
                        format!("{:.1}", s.ess),
                        d.low_ess[name].to_string(),
                    ])?;
                }
            }
            w.flush()?;
            Ok(())
        })?;
        out.push(path);

        let peaks = peaks_table(&self.root, countries)?;
        let path = dir.join("peaks.csv");
        write_with(&path, |b| {
            let mut w = csv::Writer::from_writer(b);
            w.write_record(["country", "shock", "metric", "peak_pct_change"])?;
            for r in &peaks {
                w.write_record([r.country.clone(), r.shock.clone(), r.metric.clone(), format!("{:.8}", r.peak)])?;
            }
            w.flush()?;
            Ok(())
        })?;
        out.push(path);

        for shock in Shock::ALL {
            for m in TRACKED {
                let series: Vec<Series> = countries
                    .iter()
                    .filter_map(|c| {
                        let s = sims[c].shocks.iter().find(|s| s.shock == shock.name())?;
                        let y = s.trajectories[m].clone();
                        Some(Series::line(c, (1..=y.len()).map(|h| h as f64).collect(), y))
                    })
                    .collect();
                let stem = format!("trajectories_{}_{m}", shock.name());
                write_line_chart(&dir, &stem, &format!("{m}: {} shock", shock.name()), "quarter", "% change vs baseline", &series)?;
                out.push(dir.join(format!("{stem}.svg")));
                out.push(dir.join(format!("{stem}.csv")));
            }
        }

        let mut table = CountryFeatureTable::default();
        for c in countries {
            let households = self.households(c)?;
            let persons = self.persons(c)?;
            let mut base = sample_rows.iter().find(|r| &r.0 == c).expect("row").1;
            base.spearman_rho = dep[c].functionals["spearman_rho"].median;
            table.push(c, country_features(&households, &persons, &base))?;
        }
        let path = dir.join("features.csv");
        write_with(&path, |b| Ok(table.write_csv(b)?))?;
        out.push(path);

        let mut responses = BTreeMap::new();
        for r in &peaks {
            responses.entry(format!("{}:{}", r.shock, r.metric)).or_insert_with(Vec::new).push(r.peak);
        }
        let regression = if countries.len() >= 3 {
            let reg = exploratory_regressions(&table, &responses)?;
            let path = dir.join("regression.csv");
            write_with(&path, |b| Ok(reg.write_csv(b)?))?;
            out.push(path);
            let values: Vec<Vec<f64>> = reg.fits.iter().map(|r| r.iter().map(|f| f.coefficient).collect()).collect();
            let labels: Vec<Vec<String>> = reg.fits.iter().map(|r| r.iter().map(|f| f.flag.symbol().to_string()).collect()).collect();
            let path = dir.join("regression.svg");
            std::fs::write(&path, heat_map("Standardized pairwise coefficients", &reg.features, &reg.responses, &values, &labels))?;
            out.push(path);
            Some(reg)
        } else {
            log::warn!("exploratory regression needs at least 3 countries, have {}", countries.len());
            None
        };

        #[derive(Serialize)]
        struct Bundle<'a> {
            countries: &'a [String],
            sample_metrics: &'a [(String, MetricReport)],
            dependence: &'a BTreeMap<String, DependenceFile>,
            simulations: &'a BTreeMap<String, SimulationSummary>,
            features: &'a [&'a str],
            feature_table: &'a CountryFeatureTable,
            regression: Option<&'a crate::regression::RegressionTable>,
        }
        let path = dir.join("bundle.json");
        write_json(
            &path,
            &Bundle {
                countries,
                sample_metrics: &sample_rows,
                dependence: &dep,
                simulations: &sims,
                features: &FEATURES,
                feature_table: &table,
                regression: regression.as_ref(),
            },
        )?;
        out.push(path);
        Ok(out)
    }
}
