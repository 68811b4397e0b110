//! Training loop with patience-based stopping and fully unsupervised model
//! selection, plus (model × dataset × seed × metric × fraction) grid
//! orchestration.
//!
//! No supervised quantity influences training, selection or stopping: the
//! label vector is only touched after the loop ends, to score the retained
//! partitions. Reduced-edge runs train on the subsampled graph but every
//! metric is evaluated against the full graph.

use crate::gnn::{Model, ModelKind};
use crate::graph::Graph;
use crate::metrics::{conductance, macro_f1_with_classes, modularity, nmi, MetricKind};
use crate::rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;
use thiserror::Error;

/// Schema tag carried by run records and results manifests.
pub const RESULTS_SCHEMA_VERSION: &str = "ugs-results-v1";

/// Shared experiment resources.
pub const TABLE_SEEDS: [u64; 10] = [42, 24, 976, 12345, 98765, 7, 856, 90, 672, 785];
pub const LEARNING_RATE_GRID: [f64; 6] = [0.05, 0.01, 0.005, 0.001, 0.0005, 0.0001];
pub const WEIGHT_DECAY_GRID: [f64; 4] = [0.05, 0.005, 0.0005, 0.0];
pub const PATIENCE_GRID: [usize; 4] = [25, 100, 500, 1000];
pub const DEFAULT_MAX_EPOCHS: usize = 5000;

/// Declared defaults (not paper-derived values).
pub const DEFAULT_LEARNING_RATE: f64 = 0.001;
pub const DEFAULT_WEIGHT_DECAY: f64 = 0.0;
pub const DEFAULT_PATIENCE: usize = 100;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("empty metric history")]
    EmptyHistory,
    #[error("invalid run config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Gnn(#[from] crate::gnn::GnnError),
    #[error(transparent)]
    Metric(#[from] crate::metrics::MetricError),
}

/// The unsupervised metric driving checkpoint selection and early stopping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMetric {
    Modularity,
    Conductance,
}

impl SelectionMetric {
    pub fn metric_kind(self) -> MetricKind {
        match self {
            SelectionMetric::Modularity => MetricKind::Modularity,
            SelectionMetric::Conductance => MetricKind::Conductance,
        }
    }

    pub fn name(self) -> &'static str {
        self.metric_kind().name()
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "modularity" => Some(SelectionMetric::Modularity),
            "conductance" => Some(SelectionMetric::Conductance),
            _ => None,
        }
    }
}

/// Architecture and loop mechanics; defaults live in configuration, not in
/// the hyperparameter grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSettings {
    /// Hidden layer widths; `[64]` is one hidden layer.
    pub hidden_dims: Vec<usize>,
    /// DMON collapse regularization weight λ.
    pub collapse_weight: f64,
    /// Epochs between partition evaluations.
    pub eval_interval: usize,
    /// Compare the loss instead of the selection metric for early stopping.
    pub stop_on_loss: bool,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            hidden_dims: vec![64],
            collapse_weight: 1.0,
            eval_interval: 5,
            stop_on_loss: false,
        }
    }
}

/// Everything one training run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelKind,
    pub dataset: String,
    pub seed: u64,
    /// Position in the grid; run streams derive from (seed, ordinal).
    pub run_ordinal: u64,
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// In epochs; divided by `eval_interval` to give a patience in
    /// evaluations.
    pub patience: usize,
    pub max_epochs: usize,
    pub selection_metric: SelectionMetric,
    pub edge_fraction: f64,
    /// Number of clusters handed to the model.
    pub k: usize,
    pub settings: TrainSettings,
}

impl RunConfig {
    pub fn new(model: ModelKind, dataset: &str, seed: u64, k: usize) -> Self {
        RunConfig {
            model,
            dataset: dataset.to_string(),
            seed,
            run_ordinal: 0,
            learning_rate: DEFAULT_LEARNING_RATE,
            weight_decay: DEFAULT_WEIGHT_DECAY,
            patience: DEFAULT_PATIENCE,
            max_epochs: DEFAULT_MAX_EPOCHS,
            selection_metric: SelectionMetric::Modularity,
            edge_fraction: 1.0,
            k,
            settings: TrainSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.edge_fraction > 0.0 && self.edge_fraction <= 1.0) {
            return Err(TrainError::InvalidConfig(format!(
                "edge_fraction {} outside (0, 1]",
                self.edge_fraction
            )));
        }
        if self.learning_rate <= 0.0 {
            return Err(TrainError::InvalidConfig("non-positive learning rate".into()));
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return Err(TrainError::InvalidConfig("zero epochs or patience".into()));
        }
        if self.k == 0 {
            return Err(TrainError::InvalidConfig("k must be at least 1".into()));
        }
        if self.settings.eval_interval == 0 || self.settings.hidden_dims.is_empty() {
            return Err(TrainError::InvalidConfig("bad train settings".into()));
        }
        Ok(())
    }

    /// Patience in evaluations.
    fn patience_evals(&self) -> usize {
        self.patience.div_ceil(self.settings.eval_interval).max(1)
    }

    /// Base seed for this run's random streams.
    fn stream_seed(&self) -> u64 {
        rng::derive(self.seed, self.run_ordinal)
    }
}

/// Unsupervised metrics at one evaluation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub epoch: usize,
    pub modularity: f64,
    pub conductance: f64,
}

/// Ground-truth metrics of the partition at one evaluation point; computed
/// after training, never fed back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedSnapshot {
    pub nmi: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed { epoch: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalMetrics {
    pub modularity: f64,
    pub conductance: f64,
    pub nmi: Option<f64>,
    pub f1: Option<f64>,
}

/// One (model, dataset, seed, hyperparameters) training trajectory.
///
/// Equality ignores `wall_secs`, which is measured, not derived; every other
/// field is a pure function of the config and graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: String,
    pub config: RunConfig,
    pub status: RunStatus,
    pub snapshots: Vec<Snapshot>,
    pub supervised: Option<Vec<SupervisedSnapshot>>,
    pub selected_index: usize,
    pub selected_epoch: usize,
    pub selected_partition: Vec<usize>,
    pub finals: FinalMetrics,
    pub wall_secs: f64,
}

impl PartialEq for RunRecord {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema
            && self.config == other.config
            && self.status == other.status
            && self.snapshots == other.snapshots
            && self.supervised == other.supervised
            && self.selected_index == other.selected_index
            && self.selected_epoch == other.selected_epoch
            && self.selected_partition == other.selected_partition
            && self.finals == other.finals
    }
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        matches!(self.status, RunStatus::Ok)
    }

    /// Value of a final metric, with failed runs pinned at the worst value.
    pub fn final_metric(&self, kind: MetricKind) -> f64 {
        match kind {
            MetricKind::Modularity => self.finals.modularity,
            MetricKind::Conductance => self.finals.conductance,
            MetricKind::Nmi => self.finals.nmi.unwrap_or(0.0),
            MetricKind::F1 => self.finals.f1.unwrap_or(0.0),
        }
    }

    /// Best value of a supervised metric over the whole trajectory — what a
    /// label-guided selection would have achieved on the same run.
    pub fn supervised_selection_value(&self, kind: MetricKind) -> Option<f64> {
        let series = self.supervised.as_ref()?;
        let pick = |f: fn(&SupervisedSnapshot) -> f64| {
            series.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
        };
        match kind {
            MetricKind::Nmi => Some(pick(|s| s.nmi)),
            MetricKind::F1 => Some(pick(|s| s.f1)),
            _ => None,
        }
    }
}

/// Index of the best entry: argmax for modularity, argmin for conductance,
/// earliest on ties.
pub fn select_model(history: &[f64], criterion: SelectionMetric) -> Result<usize, TrainError> {
    if history.is_empty() {
        return Err(TrainError::EmptyHistory);
    }
    let kind = criterion.metric_kind();
    let mut best = 0usize;
    for (i, &v) in history.iter().enumerate().skip(1) {
        if kind.better(v, history[best]) {
            best = i;
        }
    }
    Ok(best)
}

/// Early-stopping bookkeeping: strict improvement resets the counter.
struct Patience {
    direction: crate::metrics::Direction,
    best: Option<f64>,
    best_index: usize,
    since_best: usize,
    limit: usize,
}

impl Patience {
    fn new(direction: crate::metrics::Direction, limit: usize) -> Self {
        Patience {
            direction,
            best: None,
            best_index: 0,
            since_best: 0,
            limit,
        }
    }

    fn improved(&self, value: f64, best: f64) -> bool {
        match self.direction {
            crate::metrics::Direction::Maximize => value > best,
            crate::metrics::Direction::Minimize => value < best,
        }
    }

    /// Feeds one evaluation; returns `true` when the budget is exhausted.
    fn observe(&mut self, index: usize, value: f64) -> bool {
        match self.best {
            Some(b) if !self.improved(value, b) => {
                self.since_best += 1;
            }
            _ => {
                self.best = Some(value);
                self.best_index = index;
                self.since_best = 0;
            }
        }
        self.since_best >= self.limit
    }
}

// Stream tags for the per-run RNGs.
const STREAM_SUBSAMPLE: u64 = 1;
const STREAM_INIT: u64 = 2;
const STREAM_TRAIN: u64 = 3;
const STREAM_EXTRACT: u64 = 0x1000;

/// Trains one run: Adam updates, periodic partition evaluation, patience
/// stopping on the selection metric, and post-hoc supervised scoring of
/// every retained partition against the full graph.
pub fn train_run(cfg: &RunConfig, full_graph: &Graph) -> Result<RunRecord, TrainError> {
    cfg.validate()?;
    let start = Instant::now();
    let stream_seed = cfg.stream_seed();

    let train_graph_owned;
    let train_graph: &Graph = if cfg.edge_fraction < 1.0 {
        let mut sub_rng = rng::rng_for(stream_seed, STREAM_SUBSAMPLE);
        train_graph_owned = full_graph.subsample_edges(cfg.edge_fraction, &mut sub_rng)?;
        &train_graph_owned
    } else {
        full_graph
    };

    let mut dims = vec![full_graph.n_features()];
    dims.extend_from_slice(&cfg.settings.hidden_dims);
    let mut init_rng = rng::rng_for(stream_seed, STREAM_INIT);
    let mut model = Model::new(
        cfg.model,
        train_graph,
        &dims,
        cfg.k,
        cfg.settings.collapse_weight,
        &mut init_rng,
    )?;

    let mut adam = crate::gnn::adam::Adam::new(&model.params(), cfg.learning_rate, cfg.weight_decay);
    let mut train_rng = rng::rng_for(stream_seed, STREAM_TRAIN);

    let interval = cfg.settings.eval_interval;
    let mut patience = Patience::new(
        if cfg.settings.stop_on_loss {
            crate::metrics::Direction::Minimize
        } else {
            cfg.selection_metric.metric_kind().direction()
        },
        cfg.patience_evals(),
    );

    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut partitions: Vec<crate::graph::Partition> = Vec::new();
    let mut status = RunStatus::Ok;

    let mut eval_ordinal = 0u64;
    for epoch in 1..=cfg.max_epochs {
        let (loss, grads) = model.loss_and_grads(train_graph, &mut train_rng)?;
        if !loss.is_finite() {
            status = RunStatus::Failed {
                epoch,
                reason: "non-finite loss".into(),
            };
            break;
        }
        adam.step(&mut model.params_mut(), &grads);

        if epoch % interval == 0 || epoch == cfg.max_epochs {
            let mut extract_rng = rng::rng_for(stream_seed, STREAM_EXTRACT + eval_ordinal);
            eval_ordinal += 1;
            let partition = model.extract_partition(train_graph, cfg.k, &mut extract_rng)?;
            let q = modularity(full_graph, &partition)?;
            let c = conductance(full_graph, &partition)?;
            snapshots.push(Snapshot {
                epoch,
                modularity: q,
                conductance: c,
            });
            partitions.push(partition);

            let tracked = if cfg.settings.stop_on_loss {
                loss
            } else {
                match cfg.selection_metric {
                    SelectionMetric::Modularity => q,
                    SelectionMetric::Conductance => c,
                }
            };
            if patience.observe(snapshots.len() - 1, tracked) {
                break;
            }
        }
    }

    let failed = !matches!(status, RunStatus::Ok);
    let wall_secs = start.elapsed().as_secs_f64();

    if failed || snapshots.is_empty() {
        let reason = match &status {
            RunStatus::Failed { .. } => status.clone(),
            RunStatus::Ok => RunStatus::Failed {
                epoch: 0,
                reason: "no evaluations recorded".into(),
            },
        };
        return Ok(RunRecord {
            schema: RESULTS_SCHEMA_VERSION.to_string(),
            config: cfg.clone(),
            status: reason,
            snapshots,
            supervised: None,
            selected_index: 0,
            selected_epoch: 0,
            selected_partition: Vec::new(),
            finals: FinalMetrics {
                modularity: MetricKind::Modularity.worst(),
                conductance: MetricKind::Conductance.worst(),
                nmi: full_graph.labels().map(|_| MetricKind::Nmi.worst()),
                f1: full_graph.labels().map(|_| MetricKind::F1.worst()),
            },
            wall_secs,
        });
    }

    let series: Vec<f64> = snapshots
        .iter()
        .map(|s| match cfg.selection_metric {
            SelectionMetric::Modularity => s.modularity,
            SelectionMetric::Conductance => s.conductance,
        })
        .collect();
    let selected_index = select_model(&series, cfg.selection_metric)?;
    let selected = snapshots[selected_index].clone();
    let selected_partition = partitions[selected_index].clone();

    // Labels enter only from here on.
    let supervised = match (full_graph.labels(), full_graph.n_classes()) {
        (Some(labels), Some(n_classes)) => {
            let mut series = Vec::with_capacity(partitions.len());
            for p in &partitions {
                series.push(SupervisedSnapshot {
                    nmi: nmi(p.assignment(), labels)?,
                    f1: macro_f1_with_classes(p.assignment(), labels, n_classes)?,
                });
            }
            Some(series)
        }
        _ => None,
    };
    let finals = FinalMetrics {
        modularity: selected.modularity,
        conductance: selected.conductance,
        nmi: supervised.as_ref().map(|s| s[selected_index].nmi),
        f1: supervised.as_ref().map(|s| s[selected_index].f1),
    };

    Ok(RunRecord {
        schema: RESULTS_SCHEMA_VERSION.to_string(),
        config: cfg.clone(),
        status: RunStatus::Ok,
        snapshots,
        supervised,
        selected_index,
        selected_epoch: selected.epoch,
        selected_partition: selected_partition.assignment().to_vec(),
        finals,
        wall_secs,
    })
}

/// A dataset ready to enter a grid.
#[derive(Debug, Clone)]
pub struct NamedDataset {
    pub name: String,
    pub graph: Arc<Graph>,
    /// Clusters handed to every model, normally the class count.
    pub k: usize,
}

impl NamedDataset {
    pub fn new(name: &str, graph: Graph) -> Self {
        let k = graph.n_classes().unwrap_or(2).max(1);
        NamedDataset {
            name: name.to_string(),
            graph: Arc::new(graph),
            k,
        }
    }
}

/// Grid-level hyperparameters shared by every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHyperParams {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub patience: usize,
    pub max_epochs: usize,
}

impl Default for GridHyperParams {
    fn default() -> Self {
        GridHyperParams {
            learning_rate: DEFAULT_LEARNING_RATE,
            weight_decay: DEFAULT_WEIGHT_DECAY,
            patience: DEFAULT_PATIENCE,
            max_epochs: DEFAULT_MAX_EPOCHS,
        }
    }
}

/// Expands the Cartesian product into run configs, ordinals assigned in
/// enumeration order (datasets, models, metrics, fractions, seeds).
pub fn build_grid(
    models: &[ModelKind],
    datasets: &[NamedDataset],
    seeds: &[u64],
    metrics: &[SelectionMetric],
    edge_fractions: &[f64],
    hp: &GridHyperParams,
    settings: &TrainSettings,
) -> Vec<(RunConfig, Arc<Graph>)> {
    let mut out = Vec::new();
    let mut ordinal = 0u64;
    for ds in datasets {
        for &model in models {
            for &metric in metrics {
                for &fraction in edge_fractions {
                    for &seed in seeds {
                        let mut cfg = RunConfig::new(model, &ds.name, seed, ds.k);
                        cfg.run_ordinal = ordinal;
                        cfg.learning_rate = hp.learning_rate;
                        cfg.weight_decay = hp.weight_decay;
                        cfg.patience = hp.patience;
                        cfg.max_epochs = hp.max_epochs;
                        cfg.selection_metric = metric;
                        cfg.edge_fraction = fraction;
                        cfg.settings = settings.clone();
                        ordinal += 1;
                        out.push((cfg, Arc::clone(&ds.graph)));
                    }
                }
            }
        }
    }
    out
}

/// Executes a grid, up to `workers` runs concurrently. Results come back in
/// grid order regardless of scheduling; individual failures are isolated
/// into failed records.
pub fn run_grid(grid: Vec<(RunConfig, Arc<Graph>)>, workers: usize) -> Vec<RunRecord> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("worker pool");
    pool.install(|| {
        grid.par_iter()
            .map(|(cfg, graph)| {
                train_run(cfg, graph).unwrap_or_else(|e| RunRecord {
                    schema: RESULTS_SCHEMA_VERSION.to_string(),
                    config: cfg.clone(),
                    status: RunStatus::Failed {
                        epoch: 0,
                        reason: e.to_string(),
                    },
                    snapshots: Vec::new(),
                    supervised: None,
                    selected_index: 0,
                    selected_epoch: 0,
                    selected_partition: Vec::new(),
                    finals: FinalMetrics {
                        modularity: MetricKind::Modularity.worst(),
                        conductance: MetricKind::Conductance.worst(),
                        nmi: Some(MetricKind::Nmi.worst()),
                        f1: Some(MetricKind::F1.worst()),
                    },
                    wall_secs: 0.0,
                })
            })
            .collect()
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Aggregate CSV, one row per run in grid order. Wall-clock time lives in
/// the per-run records, not here, so reruns are byte-identical.
pub fn aggregate_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(
        "model,dataset,seed,selection_metric,edge_fraction,modularity,conductance,nmi,f1,selected_epoch\n",
    );
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},{:.6},{},{},{}\n",
            r.config.model.name(),
            r.config.dataset,
            r.config.seed,
            r.config.selection_metric.name(),
            r.config.edge_fraction,
            r.finals.modularity,
            r.finals.conductance,
            fmt_opt(r.finals.nmi),
            fmt_opt(r.finals.f1),
            r.selected_epoch,
        ));
    }
    out
}
