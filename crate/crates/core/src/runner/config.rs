use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Delimiter, SplitFractions, SyntheticConfig};
use crate::error::{Error, Result};
use crate::fairness::{ExposureFamily, DEFAULT_RIDGE_LAMBDA};
use crate::metrics::PrecisionMode;
use crate::recommenders::{ModelKind, ModelParams};

/// Prefix of environment variables that override configuration keys.
pub const ENV_PREFIX: &str = "FAIRPOI_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// Check-in file; when absent the synthetic generator is used.
    pub checkins: Option<PathBuf>,
    pub pois: Option<PathBuf>,
    pub social: Option<PathBuf>,
    pub delimiter: Delimiter,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            checkins: None,
            pois: None,
            social: None,
            delimiter: Delimiter::Tab,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSection {
    pub enabled: bool,
    pub min_users_per_poi: usize,
    pub min_pois_per_user: usize,
}

impl Default for FilterSection {
    fn default() -> Self {
        Self {
            enabled: true,
            min_users_per_poi: 10,
            min_pois_per_user: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelsSection {
    pub kinds: Vec<ModelKind>,
    #[serde(flatten)]
    pub params: ModelParams,
}

impl Default for ModelsSection {
    fn default() -> Self {
        Self {
            kinds: ModelKind::ALL.to_vec(),
            params: ModelParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExposureSection {
    pub families: Vec<ExposureFamily>,
    pub ridge_lambda: f64,
}

impl Default for ExposureSection {
    fn default() -> Self {
        Self {
            families: ExposureFamily::ALL.to_vec(),
            ridge_lambda: DEFAULT_RIDGE_LAMBDA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub k_list: Vec<usize>,
    /// Extra `(alpha, beta)` pairs evaluated with `tradeoff_family`.
    pub tradeoff_pairs: Vec<(f64, f64)>,
    pub tradeoff_family: ExposureFamily,
    pub precision_mode: PrecisionMode,
    /// Configuration compared by the significance tests.
    pub significance_k: usize,
    pub significance_alpha: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            alpha_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            beta_grid: vec![0.0],
            k_list: vec![5, 10, 20],
            tradeoff_pairs: vec![
                (0.0, 0.5),
                (0.0, 1.0),
                (0.25, 0.25),
                (0.5, 0.0),
                (0.5, 0.5),
                (1.0, 0.0),
            ],
            tradeoff_family: ExposureFamily::Linear,
            precision_mode: PrecisionMode::Standard,
            significance_k: 10,
            significance_alpha: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneSection {
    /// Candidate grid for validation tuning.
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub k: usize,
    /// Required long-tail mean exposure, as a multiple of the value at
    /// `alpha = beta = 0`.
    pub longtail_floor_ratio: f64,
}

impl Default for TuneSection {
    fn default() -> Self {
        let grid: Vec<f64> = (0..=10).map(|i| f64::from(i) / 10.0).collect();
        Self {
            alpha_grid: grid.clone(),
            beta_grid: grid,
            k: 10,
            longtail_floor_ratio: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; 0 uses every available core.
    pub jobs: usize,
    /// Reuse cached models in `out` when the configuration hash matches.
    pub cache: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 42,
            out: PathBuf::from("fairpoi-out"),
            jobs: 0,
            cache: true,
        }
    }
}

/// Full experiment configuration. See the README for the file grammar.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSection,
    pub synthetic: SyntheticConfig,
    pub filter: FilterSection,
    pub split: SplitFractions,
    pub models: ModelsSection,
    pub exposure: ExposureSection,
    pub sweep: SweepSection,
    pub tune: TuneSection,
    pub run: RunSection,
}

/// Parses a `section.key=value` override. The value is read as a TOML value
/// when possible and as a bare string otherwise.
fn parse_override(spec: &str) -> Result<(Vec<String>, toml::Value)> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(str::to_owned).collect();
    if path.iter().any(String::is_empty) {
        return Err(Error::Config(format!("bad override key `{key}`")));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()));
    Ok((path, value))
}

fn set_path(table: &mut toml::Table, path: &[String], value: toml::Value) -> Result<()> {
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = table;
    for p in parents {
        let entry = cur
            .entry(p.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{p}` is not a section")))?;
    }
    cur.insert(last.clone(), value);
    Ok(())
}

/// `FAIRPOI_SECTION__KEY=value` pairs as `section.key=value` overrides.
/// Variables without a double underscore are left to the CLI.
pub fn env_overrides(vars: impl IntoIterator<Item = (String, String)>) -> Vec<String> {
    let mut out: Vec<String> = vars
        .into_iter()
        .filter_map(|(k, v)| {
            let rest = k.strip_prefix(ENV_PREFIX)?;
            rest.contains("__")
                .then(|| format!("{}={v}", rest.to_ascii_lowercase().replace("__", ".")))
        })
        .collect();
    out.sort();
    out
}

impl ExperimentConfig {
    /// Parses TOML text and applies `section.key=value` overrides in order.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        for o in overrides {
            let (path, value) = parse_override(o)?;
            set_path(&mut table, &path, value)?;
        }
        let cfg: ExperimentConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` (or defaults when `None`), then environment overrides,
    /// then `overrides`; later sources win.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
            None => String::new(),
        };
        let mut all = env_overrides(std::env::vars());
        all.extend(overrides.iter().cloned());
        Self::from_toml_with_overrides(&text, &all)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: &[f64]| -> Result<()> {
            match v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                Some(x) => Err(Error::Config(format!("{name} value {x} outside [0, 1]"))),
                None => Ok(()),
            }
        };
        unit("alpha_grid", &self.sweep.alpha_grid)?;
        unit("beta_grid", &self.sweep.beta_grid)?;
        unit("tune.alpha_grid", &self.tune.alpha_grid)?;
        unit("tune.beta_grid", &self.tune.beta_grid)?;
        for (a, b) in &self.sweep.tradeoff_pairs {
            unit("tradeoff_pairs", &[*a, *b])?;
        }
        unit("significance_alpha", &[self.sweep.significance_alpha])?;
        if self.sweep.alpha_grid.is_empty() || self.sweep.beta_grid.is_empty() {
            return Err(Error::Config(
                "alpha_grid and beta_grid need at least one value".into(),
            ));
        }
        if self.sweep.k_list.is_empty() || self.sweep.k_list.contains(&0) || self.tune.k == 0 {
            return Err(Error::Config("k values must be at least 1".into()));
        }
        if self.models.kinds.is_empty() || self.exposure.families.is_empty() {
            return Err(Error::Config(
                "at least one model and one exposure family are required".into(),
            ));
        }
        if !(self.exposure.ridge_lambda >= 0.0) {
            return Err(Error::Config("ridge_lambda must be non-negative".into()));
        }
        if self.data.checkins.is_some() != self.data.pois.is_some() {
            return Err(Error::Config(
                "data.checkins and data.pois must be given together".into(),
            ));
        }
        self.split.validate()?;
        self.models.params.validate()?;
        if self.data.checkins.is_none() {
            self.synthetic.validate()?;
        }
        Ok(())
    }

    /// Experiment inputs that determine every result, excluding where they
    /// are written and how many threads compute them.
    fn fingerprint(&self) -> String {
        let mut c = self.clone();
        c.run.out = PathBuf::new();
        c.run.jobs = 0;
        c.run.cache = true;
        serde_json::to_string(&c).expect("config serializes")
    }

    /// SHA-256 of the result-determining configuration, hex encoded.
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.fingerprint().as_bytes()))
    }

    /// Hash of the parts that determine trained base models.
    pub fn training_hash(&self) -> String {
        #[derive(Serialize)]
        struct Training<'a> {
            data: &'a DataSection,
            synthetic: &'a SyntheticConfig,
            filter: &'a FilterSection,
            split: &'a SplitFractions,
            params: &'a ModelParams,
            ridge_lambda: f64,
        }
        let t = Training {
            data: &self.data,
            synthetic: &self.synthetic,
            filter: &self.filter,
            split: &self.split,
            params: &self.models.params,
            ridge_lambda: self.exposure.ridge_lambda,
        };
        hex::encode(Sha256::digest(
            serde_json::to_string(&t).expect("serializes").as_bytes(),
        ))
    }
}

/// Sorted `key=value` view of a config, for manifests.
pub fn flatten(cfg: &ExperimentConfig) -> BTreeMap<String, String> {
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut BTreeMap<String, String>) {
        match v {
            serde_json::Value::Object(m) => {
                for (k, v) in m {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, v, out);
                }
            }
            other => {
                out.insert(prefix.to_owned(), other.to_string());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(
        "",
        &serde_json::to_value(cfg).expect("serializes"),
        &mut out,
    );
    out
}
