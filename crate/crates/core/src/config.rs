//! Run configuration, read from TOML.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{HouseholdSchema, PersonSchema};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config value `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Country codes; empty means "every country found in the input directory".
    pub countries: Vec<String>,
    pub output_dir: PathBuf,
    pub data: DataConfig,
    pub marginals: MarginalConfig,
    pub copula: CopulaConfig,
    pub bvar: BvarConfig,
    pub bart: BartConfig,
    pub microsim: MicrosimConfig,
    pub synthetic: SyntheticConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 20240101,
            countries: Vec::new(),
            output_dir: PathBuf::from("output"),
            data: DataConfig::default(),
            marginals: MarginalConfig::default(),
            copula: CopulaConfig::default(),
            bvar: BvarConfig::default(),
            bart: BartConfig::default(),
            microsim: MicrosimConfig::default(),
            synthetic: SyntheticConfig::default(),
        }
    }
}

/// Inputs are read from `input_dir/<COUNTRY>/{households,persons,macro}.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub input_dir: PathBuf,
    pub households: HouseholdSchema,
    pub persons: PersonSchema,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            input_dir: PathBuf::from("data"),
            households: HouseholdSchema::default(),
            persons: PersonSchema::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarginalConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub ig_shape: f64,
    pub ig_scale: f64,
    pub normal_sd: f64,
    /// Use BIC instead of DIC to pick the family carried forward.
    pub select_by_bic: bool,
}

impl Default for MarginalConfig {
    fn default() -> Self {
        MarginalConfig {
            iterations: 20_000,
            burn_in: 10_000,
            thin: 5,
            ig_shape: 2.1,
            ig_scale: 1.1,
            normal_sd: 10.0,
            select_by_bic: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DependenceMode {
    /// ABSCop posterior median.
    Posterior,
    /// Weighted sample Spearman's rho (fast).
    PlugIn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CopulaConfig {
    pub proposals: usize,
    pub tail_upper: f64,
    pub tail_lower: f64,
    /// How Spearman's rho is tracked across simulation horizons.
    pub simulation_mode: DependenceMode,
    /// ABSCop proposals for the per-horizon posterior median.
    pub simulation_proposals: usize,
}

impl Default for CopulaConfig {
    fn default() -> Self {
        CopulaConfig {
            proposals: 5_000,
            tail_upper: 0.95,
            tail_lower: 0.05,
            simulation_mode: DependenceMode::Posterior,
            simulation_proposals: 2_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BvarConfig {
    pub lags: usize,
    pub horizons: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub ordering: Vec<String>,
    /// Country whose long rate is subtracted when the spread factor has to
    /// be built from the cross-section.
    pub spread_benchmark: String,
}

impl Default for BvarConfig {
    fn default() -> Self {
        BvarConfig {
            lags: 2,
            horizons: 12,
            iterations: 15_000,
            burn_in: 5_000,
            thin: 5,
            ordering: crate::bvar::DEFAULT_ORDERING.iter().map(|s| s.to_string()).collect(),
            spread_benchmark: "DE".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BartConfig {
    pub trees: usize,
    pub iterations: usize,
    pub burn_in: usize,
}

impl Default for BartConfig {
    fn default() -> Self {
        BartConfig { trees: 50, iterations: 2_000, burn_in: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicrosimConfig {
    pub bond_duration: f64,
    pub default_replacement_rate: f64,
    pub replacement_rate: BTreeMap<String, f64>,
}

impl Default for MicrosimConfig {
    fn default() -> Self {
        MicrosimConfig { bond_duration: 5.0, default_replacement_rate: 0.6, replacement_rate: BTreeMap::new() }
    }
}

impl MicrosimConfig {
    pub fn replacement_for(&self, country: &str) -> f64 {
        self.replacement_rate.get(country).copied().unwrap_or(self.default_replacement_rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub countries: Vec<String>,
    pub households: usize,
    pub quarters: usize,
    /// Gaussian-copula correlation between income and net wealth.
    pub copula_r: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            countries: ["AT", "BE", "DE", "ES", "FR", "IT", "NL", "PT"].map(String::from).to_vec(),
            households: 2_000,
            quarters: 160,
            copula_r: 0.5,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let s = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&s)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key, message: String| Err(ConfigError::Invalid { key, message });
        if self.bvar.horizons < 1 {
            return bad("bvar.horizons", "must be at least 1".into());
        }
        if self.bvar.lags < 1 {
            return bad("bvar.lags", "must be at least 1".into());
        }
        for (key, t) in [("copula.tail_upper", self.copula.tail_upper), ("copula.tail_lower", self.copula.tail_lower)] {
            if !(t > 0.0 && t < 1.0) {
                return bad(key, format!("threshold {t} not in (0, 1)"));
            }
        }
        if self.copula.proposals < 1000 || self.copula.simulation_proposals < 1000 {
            return bad("copula.proposals", "at least 1000 proposals required".into());
        }
        let rates = std::iter::once(self.microsim.default_replacement_rate).chain(self.microsim.replacement_rate.values().copied());
        for r in rates {
            if !(0.0..=1.0).contains(&r) {
                return bad("microsim.replacement_rate", format!("{r} not in [0, 1]"));
            }
        }
        if self.microsim.bond_duration < 0.0 {
            return bad("microsim.bond_duration", "must be nonnegative".into());
        }
        for (key, it, burn) in [
            ("marginals.burn_in", self.marginals.iterations, self.marginals.burn_in),
            ("bvar.burn_in", self.bvar.iterations, self.bvar.burn_in),
            ("bart.burn_in", self.bart.iterations, self.bart.burn_in),
        ] {
            if burn >= it {
                return bad(key, format!("burn-in {burn} must be below iterations {it}"));
            }
        }
        if self.marginals.thin == 0 || self.bvar.thin == 0 {
            return bad("thin", "thinning must be at least 1".into());
        }
        if self.bart.trees == 0 {
            return bad("bart.trees", "must be at least 1".into());
        }
        if !(self.synthetic.copula_r > -1.0 && self.synthetic.copula_r < 1.0) {
            return bad("synthetic.copula_r", "must lie in (-1, 1)".into());
        }
        Ok(())
    }

    /// Canonical JSON of one config section, used for cache keys.
    pub fn section_json(&self, section: &str) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        let part = match section {
            "seed" => serde_json::json!(self.seed),
            s => v.get(s).cloned().unwrap_or(serde_json::Value::Null),
        };
        serde_json::to_string(&part).expect("json")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
        let cfg = RunConfig::from_toml_str("seed = 7\n[bvar]\nlags = 1\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.bvar.lags, 1);
        assert_eq!(cfg.bvar.horizons, 12);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(matches!(
            RunConfig::from_toml_str("[copula]\ntail_upper = 1.5\n"),
            Err(ConfigError::Invalid { key: "copula.tail_upper", .. })
        ));
        assert!(matches!(
            RunConfig::from_toml_str("[bvar]\nhorizons = 0\n"),
            Err(ConfigError::Invalid { key: "bvar.horizons", .. })
        ));
        assert!(matches!(
            RunConfig::from_toml_str("[microsim]\ndefault_replacement_rate = 1.2\n"),
            Err(ConfigError::Invalid { .. })
        ));
    }

    #[test]
    fn parse_error_mentions_location() {
        let err = RunConfig::from_toml_str("seed = 1\n[bvar]\nlagz = 3\n").unwrap_err().to_string();
        assert!(err.contains("lagz"), "{err}");
        assert!(err.contains("line 3") || err.contains("3:"), "{err}");
    }
}
