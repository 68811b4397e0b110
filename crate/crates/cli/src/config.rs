//! Declarative run configuration: a flat TOML file with array values,
//! overridable by command-line flags. Every output path derives from the
//! hash of the resolved configuration, so differing configs never collide.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use ugs_core::gnn::ModelKind;
use ugs_core::trainer::{self, SelectionMetric, TrainSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    DefaultHp,
    Hpo,
    ReducedData,
    Synthetic,
    Analyze,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::DefaultHp => "default-hp",
            Experiment::Hpo => "hpo",
            Experiment::ReducedData => "reduced-data",
            Experiment::Synthetic => "synthetic",
            Experiment::Analyze => "analyze",
        }
    }
}

fn default_models() -> Vec<String> {
    vec!["dmon".into(), "dgi".into()]
}

fn default_metrics() -> Vec<String> {
    vec!["modularity".into(), "conductance".into()]
}

fn default_output_dir() -> String {
    "results".into()
}

fn default_learning_rate() -> f64 {
    trainer::DEFAULT_LEARNING_RATE
}

fn default_weight_decay() -> f64 {
    trainer::DEFAULT_WEIGHT_DECAY
}

fn default_patience() -> usize {
    trainer::DEFAULT_PATIENCE
}

fn default_max_epochs() -> usize {
    trainer::DEFAULT_MAX_EPOCHS
}

fn default_hidden_dims() -> Vec<usize> {
    vec![64]
}

fn default_collapse_weight() -> f64 {
    1.0
}

fn default_eval_interval() -> usize {
    5
}

fn default_max_trials() -> usize {
    250
}

fn default_synth_n() -> usize {
    1000
}

fn default_synth_d() -> usize {
    500
}

fn default_synth_k() -> usize {
    2
}

fn default_synth_seed() -> u64 {
    42
}

fn default_p() -> f64 {
    0.5
}

/// The declarative experiment configuration (flat TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Dataset directories (unused for `synthetic`).
    #[serde(default)]
    pub datasets: Vec<String>,
    #[serde(default = "default_models")]
    pub models: Vec<String>,
    /// Defaults to the shared ten-seed list.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_metrics")]
    pub selection_metrics: Vec<String>,
    #[serde(default)]
    pub edge_fractions: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    /// 0 means available parallelism minus one.
    #[serde(default)]
    pub workers: usize,

    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_weight_decay")]
    pub weight_decay: f64,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_max_epochs")]
    pub max_epochs: usize,

    #[serde(default = "default_hidden_dims")]
    pub hidden_dims: Vec<usize>,
    #[serde(default = "default_collapse_weight")]
    pub collapse_weight: f64,
    #[serde(default = "default_eval_interval")]
    pub eval_interval: usize,
    #[serde(default)]
    pub stop_on_loss: bool,

    #[serde(default = "default_max_trials")]
    pub max_trials: usize,

    #[serde(default = "default_synth_n")]
    pub synth_n: usize,
    #[serde(default = "default_synth_d")]
    pub synth_d: usize,
    #[serde(default = "default_synth_k")]
    pub synth_k: usize,
    #[serde(default = "default_synth_seed")]
    pub synth_seed: u64,
    #[serde(default = "default_p")]
    pub synth_p_edge: f64,
    #[serde(default = "default_p")]
    pub synth_p_feat: f64,

    /// Results directories consumed by `experiment = "analyze"`.
    #[serde(default)]
    pub results_dirs: Vec<String>,
}

/// Flag overrides applied on top of the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub output_dir: Option<String>,
    pub seeds: Option<Vec<u64>>,
    pub edge_fractions: Option<Vec<f64>>,
    pub max_trials: Option<usize>,
    pub max_epochs: Option<usize>,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("malformed config {}", path.display()))?;

        if let Some(v) = &overrides.output_dir {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = &overrides.seeds {
            cfg.seeds = v.clone();
        }
        if let Some(v) = &overrides.edge_fractions {
            cfg.edge_fractions = v.clone();
        }
        if let Some(v) = overrides.max_trials {
            cfg.max_trials = v;
        }
        if let Some(v) = overrides.max_epochs {
            cfg.max_epochs = v;
        }
        if let Some(v) = overrides.workers {
            cfg.workers = v;
        }

        // UGS_SEED overrides the global seed list for smoke tests.
        if let Ok(env_seeds) = std::env::var("UGS_SEED") {
            let parsed: Result<Vec<u64>, _> = env_seeds
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<u64>())
                .collect();
            cfg.seeds = parsed.context("UGS_SEED must be comma-separated integers")?;
        }
        if cfg.seeds.is_empty() {
            cfg.seeds = trainer::TABLE_SEEDS.to_vec();
        }
        if cfg.edge_fractions.is_empty() {
            cfg.edge_fractions = match cfg.experiment {
                Experiment::ReducedData => vec![0.33, 0.66],
                _ => vec![1.0],
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            bail!("seed list is empty");
        }
        if self.models.is_empty() {
            bail!("model list is empty");
        }
        for m in &self.models {
            if ModelKind::parse(m).is_none() {
                bail!("unknown model {m:?} (expected dmon or dgi)");
            }
        }
        for m in &self.selection_metrics {
            if SelectionMetric::parse(m).is_none() {
                bail!("unknown selection metric {m:?}");
            }
        }
        for &f in &self.edge_fractions {
            if !(f > 0.0 && f <= 1.0) {
                bail!("edge fraction {f} outside (0, 1]");
            }
        }
        match self.experiment {
            Experiment::Synthetic => {}
            Experiment::Analyze => {
                if self.results_dirs.is_empty() {
                    bail!("analyze experiment needs results_dirs");
                }
                for d in &self.results_dirs {
                    if !Path::new(d).is_dir() {
                        bail!("results directory {d:?} does not exist");
                    }
                }
            }
            _ => {
                if self.datasets.is_empty() {
                    bail!("experiment {:?} needs datasets", self.experiment.name());
                }
                for d in &self.datasets {
                    if !Path::new(d).is_dir() {
                        bail!("dataset directory {d:?} does not exist");
                    }
                }
            }
        }
        Ok(())
    }

    pub fn model_kinds(&self) -> Vec<ModelKind> {
        self.models
            .iter()
            .map(|m| ModelKind::parse(m).expect("validated"))
            .collect()
    }

    pub fn metric_kinds(&self) -> Vec<SelectionMetric> {
        self.selection_metrics
            .iter()
            .map(|m| SelectionMetric::parse(m).expect("validated"))
            .collect()
    }

    pub fn train_settings(&self) -> TrainSettings {
        TrainSettings {
            hidden_dims: self.hidden_dims.clone(),
            collapse_weight: self.collapse_weight,
            eval_interval: self.eval_interval,
            stop_on_loss: self.stop_on_loss,
        }
    }

    pub fn resolved_workers(&self) -> usize {
        if self.workers > 0 {
            self.workers
        } else {
            std::thread::available_parallelism()
                .map(|n| n.get().saturating_sub(1))
                .unwrap_or(1)
                .max(1)
        }
    }

    /// Stable hash of every resolved field; disjoint configs get disjoint
    /// output paths.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in canonical.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    /// Directory all outputs of this config land in.
    pub fn grid_dir(&self) -> PathBuf {
        Path::new(&self.output_dir).join(format!("grid-{}", self.hash()))
    }
}
