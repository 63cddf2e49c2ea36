use std::collections::HashMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cfkit::knn::{Aggregation, Metric, Orientation};
use cfkit::mf::PmfConfig;
use cfkit::{CfError, Result};

/// Quality measures selectable on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Mae,
    Coverage,
    Precision,
    Recall,
    F1,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Mae => "MAE",
            Measure::Coverage => "COVERAGE",
            Measure::Precision => "PRECISION",
            Measure::Recall => "RECALL",
            Measure::F1 => "F1",
        }
    }

    pub fn needs_recommendation_params(self) -> bool {
        matches!(self, Measure::Precision | Measure::Recall | Measure::F1)
    }
}

impl FromStr for Measure {
    type Err = CfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "MAE" => Ok(Measure::Mae),
            "COVERAGE" => Ok(Measure::Coverage),
            "PRECISION" => Ok(Measure::Precision),
            "RECALL" => Ok(Measure::Recall),
            "F1" => Ok(Measure::F1),
            other => Err(CfError::InvalidArgument(format!(
                "unknown measure `{other}` (expected MAE, COVERAGE, PRECISION, RECALL or F1)"
            ))),
        }
    }
}

/// Dataset and split settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct DataConfig {
    pub dataset: PathBuf,
    pub separator: String,
    pub test_user_fraction: f64,
    pub test_item_fraction: f64,
    pub seed: u64,
    /// Resolved worker count (>= 1).
    pub workers: usize,
    pub min_rating: Option<f64>,
    pub max_rating: Option<f64>,
}

/// Fully resolved configuration of a `knn` run.
#[derive(Debug, Clone)]
pub struct KnnConfig {
    pub data: DataConfig,
    pub orientation: Orientation,
    pub metrics: Vec<Metric>,
    pub k_values: Vec<usize>,
    pub aggregation: Aggregation,
    pub measures: Vec<Measure>,
    pub list_size: Option<usize>,
    pub threshold: Option<f64>,
    pub normalize_mae: bool,
    pub csv: Option<PathBuf>,
}

/// Fully resolved configuration of an `mf` run.
#[derive(Debug, Clone)]
pub struct MfConfig {
    pub data: DataConfig,
    pub pmf: PmfConfig,
    pub measures: Vec<Measure>,
    pub list_size: Option<usize>,
    pub threshold: Option<f64>,
    pub normalize_mae: bool,
    pub csv: Option<PathBuf>,
}

/// Validates the parts shared by `knn` and `mf`.
pub fn validate_measures(
    measures: &[Measure],
    list_size: Option<usize>,
    threshold: Option<f64>,
) -> Result<()> {
    if measures.is_empty() {
        return Err(CfError::InvalidArgument(
            "select at least one measure".into(),
        ));
    }
    if measures.iter().any(|m| m.needs_recommendation_params())
        && (list_size.is_none() || threshold.is_none())
    {
        return Err(CfError::InvalidArgument(
            "PRECISION/RECALL/F1 require --n and --theta".into(),
        ));
    }
    Ok(())
}

pub fn validate_k_values(k_values: &[usize]) -> Result<()> {
    if k_values.is_empty() {
        return Err(CfError::InvalidArgument(
            "the k list must not be empty".into(),
        ));
    }
    if k_values.iter().any(|&k| k == 0) {
        return Err(CfError::InvalidArgument("k values must be positive".into()));
    }
    if k_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CfError::InvalidArgument(
            "k values must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Key=value settings read from `--config`. Lines starting with `#` and
/// blank lines are skipped; flags override these entries.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: HashMap<String, String>,
}

impl ConfigFile {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CfError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CfError::Parse {
                line: line_no + 1,
                message: format!("expected key=value, found `{line}`"),
            })?;
            entries.insert(key.trim().to_owned(), value.trim().to_owned());
        }
        Ok(Self { entries })
    }

    /// Flag value if present, else the config-file entry, else `default`.
    pub fn resolve<T>(&self, key: &str, flag: Option<T>, default: Option<T>) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        if let Some(value) = flag {
            return Ok(value);
        }
        if let Some(raw) = self.entries.get(key) {
            return raw.parse().map_err(|e| {
                CfError::InvalidArgument(format!("config key `{key}`: bad value `{raw}`: {e}"))
            });
        }
        default.ok_or_else(|| CfError::InvalidArgument(format!("missing required `--{key}`")))
    }

    /// List-valued setting: the repeatable flag wins when non-empty, else a
    /// comma-separated config entry, else `default`.
    pub fn resolve_list<T>(&self, key: &str, flag: &[T], default: Option<Vec<T>>) -> Result<Vec<T>>
    where
        T: FromStr + Clone,
        T::Err: Display,
    {
        if !flag.is_empty() {
            return Ok(flag.to_vec());
        }
        if let Some(raw) = self.entries.get(key) {
            return raw
                .split(',')
                .map(|part| {
                    let part = part.trim();
                    part.parse().map_err(|e| {
                        CfError::InvalidArgument(format!(
                            "config key `{key}`: bad value `{part}`: {e}"
                        ))
                    })
                })
                .collect();
        }
        default.ok_or_else(|| CfError::InvalidArgument(format!("missing required `--{key}`")))
    }

    /// Boolean switch: set by flag, or by a truthy config entry.
    pub fn resolve_switch(&self, key: &str, flag: bool) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        match self.entries.get(key).map(String::as_str) {
            None => Ok(false),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(other) => Err(CfError::InvalidArgument(format!(
                "config key `{key}`: bad boolean `{other}`"
            ))),
        }
    }
}
