//! Experiment configuration: optional TOML file values overlaid by flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileBudgets {
    pub probes: Option<usize>,
    pub lf_star_budget: Option<usize>,
    pub samples: Option<usize>,
    pub ascent_steps: Option<usize>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileOutput {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub budgets: FileBudgets,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub output: FileOutput,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Budgets {
    pub probes: usize,
    pub lf_star_budget: usize,
    pub samples: usize,
    pub ascent_steps: usize,
    pub max_iter: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { probes: 8, lf_star_budget: 30, samples: 16, ascent_steps: 20, max_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// Fully resolved settings of one run, embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub budgets: Budgets,
    pub tolerances: BTreeMap<String, f64>,
    pub output: Output,
}

/// Values given on the command line; `None` falls back to the file, then to defaults.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub sizes: Option<Vec<usize>>,
    pub probes: Option<usize>,
    pub lf_star_budget: Option<usize>,
    pub samples: Option<usize>,
    pub ascent_steps: Option<usize>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_NORM_TOL: f64 = 1e-10;

impl ExperimentConfig {
    pub fn resolve(file: FileConfig, flags: Overrides, default_sizes: &[usize]) -> Result<Self, CliError> {
        let d = Budgets::default();
        let fb = file.budgets;
        let budgets = Budgets {
            probes: flags.probes.or(fb.probes).unwrap_or(d.probes),
            lf_star_budget: flags.lf_star_budget.or(fb.lf_star_budget).unwrap_or(d.lf_star_budget),
            samples: flags.samples.or(fb.samples).unwrap_or(d.samples),
            ascent_steps: flags.ascent_steps.or(fb.ascent_steps).unwrap_or(d.ascent_steps),
            max_iter: flags.max_iter.or(fb.max_iter).unwrap_or(d.max_iter),
        };
        let mut tolerances = file.tolerances;
        tolerances.entry("norm".into()).or_insert(DEFAULT_NORM_TOL);
        if let Some(t) = flags.tol {
            tolerances.insert("norm".into(), t);
        }
        let cfg = ExperimentConfig {
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            sizes: flags.sizes.or(file.sizes).unwrap_or_else(|| default_sizes.to_vec()),
            budgets,
            tolerances,
            output: Output {
                path: flags.out.or(file.output.path),
                format: flags.format.or(file.output.format).unwrap_or(Format::Json),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Usage(m.to_string()));
        if self.sizes.is_empty() || self.sizes[0] == 0 {
            return bad("sizes must be a nonempty list of positive dimensions");
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sizes must be strictly increasing");
        }
        let b = &self.budgets;
        if [b.probes, b.lf_star_budget, b.samples, b.ascent_steps, b.max_iter].contains(&0) {
            return bad("budgets must be positive");
        }
        if self.tolerances.values().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad("tolerances must be positive and finite");
        }
        Ok(())
    }

    pub fn norm_tol(&self) -> f64 {
        self.tolerances["norm"]
    }
}
