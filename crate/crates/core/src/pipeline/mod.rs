//! Staged pipeline with a content-hash cache.
//!
//! Stages run per country where possible. A unit of work is skipped when
//! the manifest records the same config-section hash, the same input file
//! hashes and output files whose hashes still match.

mod stages;
pub mod synthetic;

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::RunConfig;

pub use stages::{peaks_table, PeakRow};

/// Environment variable overriding `output_dir`.
pub const OUTPUT_ENV: &str = "MPDIST_OUTPUT";

pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
#[error("stage `{stage}` failed: {source}")]
pub struct PipelineError {
    pub stage: String,
    #[source]
    pub source: BoxError,
}

impl PipelineError {
    pub fn new(stage: &str, source: impl Into<BoxError>) -> Self {
        PipelineError { stage: stage.to_string(), source: source.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    GenerateSynthetic,
    FitMarginals,
    Dependence,
    Bvar,
    Simulate,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] =
        [Stage::GenerateSynthetic, Stage::FitMarginals, Stage::Dependence, Stage::Bvar, Stage::Simulate, Stage::Report];

    pub fn name(self) -> &'static str {
        match self {
            Stage::GenerateSynthetic => "generate-synthetic",
            Stage::FitMarginals => "fit-marginals",
            Stage::Dependence => "dependence",
            Stage::Bvar => "bvar",
            Stage::Simulate => "simulate",
            Stage::Report => "report",
        }
    }

    /// Config sections whose values determine the stage output.
    fn sections(self) -> &'static [&'static str] {
        match self {
            Stage::GenerateSynthetic => &["seed", "synthetic", "data"],
            Stage::FitMarginals => &["seed", "data", "marginals"],
            Stage::Dependence => &["seed", "data", "marginals", "copula"],
            Stage::Bvar => &["seed", "data", "bvar"],
            Stage::Simulate => &["seed", "data", "marginals", "copula", "bvar", "bart", "microsim"],
            Stage::Report => &["seed", "data", "marginals", "copula", "bvar", "bart", "microsim"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub stage: Stage,
    pub config_hash: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub wall_seconds: f64,
    pub status: String,
}

/// Per-unit cache records keyed by `stage/country` (or just `stage`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub run_id: String,
    pub config_hash: String,
    pub units: BTreeMap<String, UnitRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> std::io::Result<String> {
    let mut f = std::fs::File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Outcome of one unit of work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitOutcome {
    Cached,
    Ran,
}

pub struct Pipeline {
    pub config: RunConfig,
    pub root: PathBuf,
    pub countries_filter: Vec<String>,
    pub force: bool,
    manifest: PipelineManifest,
    /// Outcomes of the units touched in this invocation, in completion order.
    pub log: Vec<(String, UnitOutcome)>,
}

impl Pipeline {
    /// Output root is `$MPDIST_OUTPUT` when set, else `config.output_dir`.
    pub fn new(config: RunConfig) -> Self {
        let root = std::env::var_os(OUTPUT_ENV).map(PathBuf::from).unwrap_or_else(|| config.output_dir.clone());
        Self::with_root(config, root)
    }

    pub fn with_root(config: RunConfig, root: PathBuf) -> Self {
        let manifest = std::fs::read_to_string(root.join("manifest.json"))
            .ok()
            .and_then(|s| serde_json::from_str(&s).ok())
            .unwrap_or_default();
        Pipeline { config, root, countries_filter: Vec::new(), force: false, manifest, log: Vec::new() }
    }

    pub fn manifest(&self) -> &PipelineManifest {
        &self.manifest
    }

    fn stage_hash(&self, stage: Stage) -> String {
        let mut parts: Vec<String> = stage.sections().iter().map(|s| format!("{s}={}", self.config.section_json(s))).collect();
        parts.push(format!("version={}", env!("CARGO_PKG_VERSION")));
        sha256_hex(parts.join("\n").as_bytes())
    }

    fn full_hash(&self) -> String {
        sha256_hex(serde_json::to_string(&self.config).expect("config serializes").as_bytes())
    }

    fn rel(&self, p: &Path) -> String {
        p.strip_prefix(&self.root).unwrap_or(p).to_string_lossy().replace('\\', "/")
    }

    fn is_fresh(&self, key: &str, config_hash: &str, inputs: &BTreeMap<String, String>) -> bool {
        let Some(rec) = self.manifest.units.get(key) else { return false };
        if rec.config_hash != config_hash || &rec.inputs != inputs || rec.status != "ok" {
            return false;
        }
        rec.outputs.iter().all(|(p, h)| {
            let path = if Path::new(p).is_absolute() { PathBuf::from(p) } else { self.root.join(p) };
            hash_file(&path).map(|x| &x == h).unwrap_or(false)
        })
    }

    /// Run `work` unless its record is fresh. `work` returns the files it wrote.
    fn unit<F>(&mut self, stage: Stage, key: &str, inputs: &[PathBuf], work: F) -> Result<UnitOutcome, PipelineError>
    where
        F: Fn(&Pipeline) -> Result<Vec<PathBuf>, BoxError> + Sync,
    {
        let results = self.units_parallel(stage, vec![(key.to_string(), inputs.to_vec())], |p, _| work(p));
        results.map(|mut v| v.pop().expect("one unit"))
    }

    /// Run several independent units of one stage in parallel; manifest
    /// updates are applied in key order afterwards.
    fn units_parallel<F>(
        &mut self,
        stage: Stage,
        units: Vec<(String, Vec<PathBuf>)>,
        work: F,
    ) -> Result<Vec<UnitOutcome>, PipelineError>
    where
        F: Fn(&Pipeline, &str) -> Result<Vec<PathBuf>, BoxError> + Sync,
    {
        use rayon::prelude::*;
        let config_hash = self.stage_hash(stage);
        let mut prepared = Vec::with_capacity(units.len());
        for (key, inputs) in units {
            let mut hashes = BTreeMap::new();
            for p in &inputs {
                let h = hash_file(p).map_err(|e| {
                    PipelineError::new(stage.name(), format!("missing input {} for `{key}`: {e}", p.display()))
                })?;
                hashes.insert(self.rel(p), h);
            }
            let fresh = !self.force && self.is_fresh(&key, &config_hash, &hashes);
            prepared.push((key, hashes, fresh));
        }
        let this = &*self;
        let done: Vec<Result<Option<UnitRecord>, PipelineError>> = prepared
            .par_iter()
            .map(|(key, hashes, fresh)| {
                if *fresh {
                    log::info!("{key}: cached");
                    return Ok(None);
                }
                log::info!("{key}: running");
                let start = Instant::now();
                let outputs = work(this, key).map_err(|e| PipelineError::new(stage.name(), format!("{key}: {e}")))?;
                let mut out_hashes = BTreeMap::new();
                for p in outputs {
                    let h = hash_file(&p).map_err(|e| PipelineError::new(stage.name(), e))?;
                    out_hashes.insert(this.rel(&p), h);
                }
                Ok(Some(UnitRecord {
                    stage,
                    config_hash: config_hash.clone(),
                    inputs: hashes.clone(),
                    outputs: out_hashes,
                    wall_seconds: start.elapsed().as_secs_f64(),
                    status: "ok".into(),
                }))
            })
            .collect();
        let mut outcomes = Vec::with_capacity(done.len());
        let mut first_err = None;
        for ((key, _, _), r) in prepared.into_iter().zip(done) {
            match r {
                Ok(Some(rec)) => {
                    self.manifest.units.insert(key.clone(), rec);
                    self.log.push((key, UnitOutcome::Ran));
                    outcomes.push(UnitOutcome::Ran);
                }
                Ok(None) => {
                    self.log.push((key, UnitOutcome::Cached));
                    outcomes.push(UnitOutcome::Cached);
                }
                Err(e) => {
                    self.manifest.units.remove(&key);
                    first_err.get_or_insert(e);
                }
            }
        }
        self.save_manifest().map_err(|e| PipelineError::new(stage.name(), e))?;
        match first_err {
            Some(e) => Err(e),
            None => Ok(outcomes),
        }
    }

    fn save_manifest(&mut self) -> std::io::Result<()> {
        std::fs::create_dir_all(&self.root)?;
        self.manifest.config_hash = self.full_hash();
        self.manifest.run_id = self.manifest.config_hash[..16].to_string();
        let s = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        std::fs::write(self.root.join("manifest.json"), s)
    }

    fn input_dir(&self) -> &Path {
        &self.config.data.input_dir
    }

    /// Every country directory under the input root that holds a household
    /// file, sorted.
    pub fn available_countries(&self) -> Vec<String> {
        let mut out: Vec<String> = std::fs::read_dir(self.input_dir())
            .map(|rd| {
                rd.filter_map(|e| e.ok())
                    .filter(|e| e.path().join("households.csv").is_file())
                    .filter_map(|e| e.file_name().to_str().map(String::from))
                    .collect()
            })
            .unwrap_or_default();
        out.sort();
        out
    }

    /// Countries processed by this invocation: the configured list (or all
    /// available ones), narrowed by the `--country` filter.
    pub fn countries(&self) -> Vec<String> {
        let base = if self.config.countries.is_empty() { self.available_countries() } else { self.config.countries.clone() };
        base.into_iter().filter(|c| self.countries_filter.is_empty() || self.countries_filter.contains(c)).collect()
    }

    fn country_file(&self, country: &str, file: &str) -> PathBuf {
        self.input_dir().join(country).join(file)
    }

    fn out_dir(&self, stage: Stage, country: Option<&str>) -> PathBuf {
        let d = self.root.join(stage.name());
        match country {
            Some(c) => d.join(c),
            None => d,
        }
    }

    fn seed(&self, stage: Stage, country: &str) -> u64 {
        crate::rng::derive_seed(self.config.seed, &[stage.name(), country])
    }

    /// Run `stage` and everything upstream of it.
    pub fn run(&mut self, stage: Stage) -> Result<(), PipelineError> {
        match stage {
            Stage::GenerateSynthetic => self.generate_synthetic(),
            Stage::FitMarginals => self.fit_marginals(),
            Stage::Dependence => {
                self.fit_marginals()?;
                self.dependence()
            }
            Stage::Bvar => self.bvar(),
            Stage::Simulate => {
                self.fit_marginals()?;
                self.bvar()?;
                self.simulate()
            }
            Stage::Report => {
                self.fit_marginals()?;
                self.dependence()?;
                self.bvar()?;
                self.simulate()?;
                self.report()
            }
        }
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), BoxError> {
    let s = serde_json::to_string_pretty(value)?;
    std::fs::write(path, s + "\n")?;
    Ok(())
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, BoxError> {
    let s = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(serde_json::from_str(&s).map_err(|e| format!("{}: {e}", path.display()))?)
}

pub(crate) fn write_with<F>(path: &Path, f: F) -> Result<(), BoxError>
where
    F: FnOnce(&mut Vec<u8>) -> Result<(), BoxError>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}
