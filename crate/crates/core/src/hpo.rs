//! Multi-objective Tree-structured Parzen Estimator over the categorical
//! hyperparameter grids, optimizing (modularity, conductance) jointly
//! without any label access.
//!
//! Completed trials are split into good/bad sets by nondominated rank with
//! crowding-distance ties; per-dimension categorical Parzen densities with
//! add-one smoothing score candidates by the density ratio l(x)/g(x). The
//! dimensions of this space are independent, but the sampler walks them in
//! declaration order so conditional spaces can hook in later.

use crate::graph::Graph;
use crate::rng;
use crate::trainer::{
    train_run, NamedDataset, RunConfig, SelectionMetric, TrainSettings, LEARNING_RATE_GRID,
    PATIENCE_GRID, WEIGHT_DECAY_GRID,
};
use crate::gnn::ModelKind;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HpoError {
    #[error("nondominated split needs at least 2 trials, got {0}")]
    TooFewTrials(usize),
    #[error("budget exhausted with zero successful trials")]
    AllTrialsFailed,
}

/// The categorical search grids. Defaults are the shared resource
/// allocation; they can be overridden for tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub learning_rates: Vec<f64>,
    pub weight_decays: Vec<f64>,
    pub patiences: Vec<usize>,
    pub max_trials: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            learning_rates: LEARNING_RATE_GRID.to_vec(),
            weight_decays: WEIGHT_DECAY_GRID.to_vec(),
            patiences: PATIENCE_GRID.to_vec(),
            max_trials: 250,
        }
    }
}

impl SearchSpace {
    fn dim_sizes(&self) -> [usize; 3] {
        [
            self.learning_rates.len(),
            self.weight_decays.len(),
            self.patiences.len(),
        ]
    }

    pub fn n_points(&self) -> usize {
        self.dim_sizes().iter().product()
    }

    pub fn point(&self, indices: [usize; 3]) -> HpoPoint {
        HpoPoint {
            indices,
            learning_rate: self.learning_rates[indices[0]],
            weight_decay: self.weight_decays[indices[1]],
            patience: self.patiences[indices[2]],
        }
    }

    pub fn uniform_point(&self, rng: &mut ChaCha8Rng) -> HpoPoint {
        let sizes = self.dim_sizes();
        self.point([
            rng.random_range(0..sizes[0]),
            rng.random_range(0..sizes[1]),
            rng.random_range(0..sizes[2]),
        ])
    }
}

/// One hyperparameter point; indices locate it on the grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HpoPoint {
    pub indices: [usize; 3],
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub patience: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Ok,
    Failed,
}

/// A hyperparameter point with its multi-objective unsupervised scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpoTrial {
    pub seed: u64,
    pub ordinal: usize,
    pub point: HpoPoint,
    /// Maximized.
    pub modularity: f64,
    /// Minimized.
    pub conductance: f64,
    pub status: TrialStatus,
}

impl HpoTrial {
    /// `true` if `self` Pareto-dominates `other`.
    fn dominates(&self, other: &HpoTrial) -> bool {
        let ge = self.modularity >= other.modularity && self.conductance <= other.conductance;
        let strict = self.modularity > other.modularity || self.conductance < other.conductance;
        ge && strict
    }
}

/// MOTPE knobs; standard TPE settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotpeConfig {
    pub gamma: f64,
    pub n_startup: usize,
    pub n_candidates: usize,
}

impl Default for MotpeConfig {
    fn default() -> Self {
        MotpeConfig {
            gamma: 0.25,
            n_startup: 10,
            n_candidates: 24,
        }
    }
}

/// Sorts trials by nondominated rank (ties by descending crowding distance)
/// and splits off the top `⌈gamma·n⌉` as the good set.
pub fn nondominated_split(
    trials: &[HpoTrial],
    gamma: f64,
) -> Result<(Vec<&HpoTrial>, Vec<&HpoTrial>), HpoError> {
    if trials.len() < 2 {
        return Err(HpoError::TooFewTrials(trials.len()));
    }
    let n = trials.len();

    // Front peeling.
    let mut rank = vec![usize::MAX; n];
    let mut assigned = 0usize;
    let mut current = 0usize;
    while assigned < n {
        let mut front = Vec::new();
        'outer: for i in 0..n {
            if rank[i] != usize::MAX {
                continue;
            }
            for j in 0..n {
                if i != j && rank[j] == usize::MAX && trials[j].dominates(&trials[i]) {
                    continue 'outer;
                }
            }
            front.push(i);
        }
        for &i in &front {
            rank[i] = current;
        }
        assigned += front.len();
        current += 1;
    }

    // Crowding distance per front.
    let mut crowding = vec![0.0f64; n];
    for r in 0..current {
        let members: Vec<usize> = (0..n).filter(|&i| rank[i] == r).collect();
        if members.len() <= 2 {
            for &i in &members {
                crowding[i] = f64::INFINITY;
            }
            continue;
        }
        for objective in 0..2 {
            let value = |i: usize| -> f64 {
                if objective == 0 {
                    trials[i].modularity
                } else {
                    trials[i].conductance
                }
            };
            let mut order = members.clone();
            order.sort_by(|&a, &b| value(a).partial_cmp(&value(b)).unwrap());
            let lo = value(order[0]);
            let hi = value(order[order.len() - 1]);
            crowding[order[0]] = f64::INFINITY;
            crowding[order[order.len() - 1]] = f64::INFINITY;
            if hi > lo {
                for w in 1..order.len() - 1 {
                    crowding[order[w]] += (value(order[w + 1]) - value(order[w - 1])) / (hi - lo);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        rank[a]
            .cmp(&rank[b])
            .then_with(|| crowding[b].partial_cmp(&crowding[a]).unwrap())
            .then_with(|| a.cmp(&b))
    });
    let n_good = ((gamma * n as f64).ceil() as usize).clamp(1, n - 1);
    let good = order[..n_good].iter().map(|&i| &trials[i]).collect();
    let bad = order[n_good..].iter().map(|&i| &trials[i]).collect();
    Ok((good, bad))
}

/// Per-dimension categorical density with add-one smoothing.
fn smoothed_density(indices: &[usize], grid_size: usize) -> Vec<f64> {
    let mut counts = vec![1.0f64; grid_size];
    for &i in indices {
        counts[i] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    counts.iter().map(|c| c / total).collect()
}

fn sample_categorical(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let mut target = rng.random::<f64>() * weights.iter().sum::<f64>();
    for (i, &w) in weights.iter().enumerate() {
        if target < w {
            return i;
        }
        target -= w;
    }
    weights.len() - 1
}

/// Draws `n_candidates` points from the good-set density `l` and returns the
/// one maximizing `Π_dim l(x)/g(x)`. Uniform when the history is empty.
pub fn parzen_sample(
    space: &SearchSpace,
    good: &[&HpoTrial],
    bad: &[&HpoTrial],
    config: &MotpeConfig,
    rng: &mut ChaCha8Rng,
) -> HpoPoint {
    parzen_sample_excluding(space, good, bad, config, &Default::default(), rng)
}

/// Like [`parzen_sample`], but when some candidates have not been evaluated
/// yet, the best unevaluated one wins; an exhausted candidate set falls
/// back to the overall argmax. Re-evaluating a point teaches a
/// deterministic objective nothing, so the optimizer prefers fresh ones.
pub fn parzen_sample_excluding(
    space: &SearchSpace,
    good: &[&HpoTrial],
    bad: &[&HpoTrial],
    config: &MotpeConfig,
    evaluated: &std::collections::BTreeSet<[usize; 3]>,
    rng: &mut ChaCha8Rng,
) -> HpoPoint {
    let sizes = space.dim_sizes();
    let mut l_density = Vec::with_capacity(3);
    let mut g_density = Vec::with_capacity(3);
    for dim in 0..3 {
        let good_idx: Vec<usize> = good.iter().map(|t| t.point.indices[dim]).collect();
        let bad_idx: Vec<usize> = bad.iter().map(|t| t.point.indices[dim]).collect();
        l_density.push(smoothed_density(&good_idx, sizes[dim]));
        g_density.push(smoothed_density(&bad_idx, sizes[dim]));
    }

    let mut best: Option<([usize; 3], f64)> = None;
    let mut best_fresh: Option<([usize; 3], f64)> = None;
    for _ in 0..config.n_candidates.max(1) {
        let mut indices = [0usize; 3];
        let mut score = 0.0;
        for dim in 0..3 {
            let i = sample_categorical(&l_density[dim], rng);
            indices[dim] = i;
            score += l_density[dim][i].ln() - g_density[dim][i].ln();
        }
        if best.map(|(_, s)| score > s).unwrap_or(true) {
            best = Some((indices, score));
        }
        if !evaluated.contains(&indices) && best_fresh.map(|(_, s)| score > s).unwrap_or(true) {
            best_fresh = Some((indices, score));
        }
    }
    let chosen = best_fresh.or(best).expect("at least one candidate");
    space.point(chosen.0)
}

/// One seed's optimization: `max_trials` sequential trials against an
/// arbitrary objective. The objective returns (modularity, conductance, ok).
///
/// Proposals that were already evaluated are redrawn a bounded number of
/// times — the objective is deterministic per point, so re-evaluating the
/// incumbent teaches nothing. Revisits still happen once the retries are
/// spent (or the grid is exhausted).
pub fn optimize_seed<F>(
    space: &SearchSpace,
    config: &MotpeConfig,
    seed: u64,
    mut objective: F,
) -> Vec<HpoTrial>
where
    F: FnMut(usize, &HpoPoint) -> (f64, f64, bool),
{
    let mut sampler_rng = rng::rng_for(seed, 0x7e9e);
    let mut trials: Vec<HpoTrial> = Vec::with_capacity(space.max_trials);
    let mut seen: std::collections::BTreeSet<[usize; 3]> = std::collections::BTreeSet::new();
    for ordinal in 0..space.max_trials {
        // The split sees each point once (first occurrence); duplicate
        // trials would otherwise pile density onto the incumbent and stall
        // the sampler.
        let mut history_seen = std::collections::BTreeSet::new();
        let history: Vec<HpoTrial> = trials
            .iter()
            .filter(|t| history_seen.insert(t.point.indices))
            .cloned()
            .collect();
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            if ordinal < config.n_startup || history.len() < 2 {
                space.uniform_point(rng)
            } else {
                let (good, bad) =
                    nondominated_split(&history, config.gamma).expect("len checked above");
                parzen_sample_excluding(space, &good, &bad, config, &seen, rng)
            }
        };
        let mut point = draw(&mut sampler_rng);
        for _ in 0..16 {
            if !seen.contains(&point.indices) {
                break;
            }
            point = draw(&mut sampler_rng);
        }
        seen.insert(point.indices);
        let (modularity, conductance, ok) = objective(ordinal, &point);
        trials.push(HpoTrial {
            seed,
            ordinal,
            point,
            modularity: if ok { modularity } else { -1.0 },
            conductance: if ok { conductance } else { 1.0 },
            status: if ok { TrialStatus::Ok } else { TrialStatus::Failed },
        });
    }
    trials
}

/// Winner rule: maximize modularity, break ties by lower conductance, then
/// by earliest trial.
pub fn best_trial(trials: &[HpoTrial]) -> Result<&HpoTrial, HpoError> {
    trials
        .iter()
        .filter(|t| t.status == TrialStatus::Ok)
        .min_by(|a, b| {
            b.modularity
                .partial_cmp(&a.modularity)
                .unwrap()
                .then(a.conductance.partial_cmp(&b.conductance).unwrap())
                .then(a.ordinal.cmp(&b.ordinal))
        })
        .ok_or(HpoError::AllTrialsFailed)
}

/// Result of one seed's hyperparameter optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedHpo {
    pub seed: u64,
    pub best: HpoTrial,
    pub trials: Vec<HpoTrial>,
}

/// Full-training HPO: per seed, up to `max_trials` sequential trials, each a
/// complete training run with the sampled point; labels are never consulted.
/// Different seeds optimize concurrently.
#[allow(clippy::too_many_arguments)]
pub fn run_hpo(
    model: ModelKind,
    dataset: &NamedDataset,
    space: &SearchSpace,
    seeds: &[u64],
    selection: SelectionMetric,
    max_epochs: usize,
    settings: &TrainSettings,
    workers: usize,
) -> Result<Vec<SeedHpo>, HpoError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("worker pool");
    let results: Vec<Result<SeedHpo, HpoError>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let graph: &Graph = &dataset.graph;
                let trials = optimize_seed(space, &MotpeConfig::default(), seed, |ordinal, point| {
                    let mut cfg = RunConfig::new(model, &dataset.name, seed, dataset.k);
                    cfg.run_ordinal = ordinal as u64;
                    cfg.learning_rate = point.learning_rate;
                    cfg.weight_decay = point.weight_decay;
                    cfg.patience = point.patience;
                    cfg.max_epochs = max_epochs;
                    cfg.selection_metric = selection;
                    cfg.settings = settings.clone();
                    match train_run(&cfg, graph) {
                        Ok(rec) if rec.is_ok() => {
                            (rec.finals.modularity, rec.finals.conductance, true)
                        }
                        _ => (-1.0, 1.0, false),
                    }
                });
                let best = best_trial(&trials)?.clone();
                Ok(SeedHpo {
                    seed,
                    best,
                    trials,
                })
            })
            .collect()
    });
    results.into_iter().collect()
}

/// Trial log CSV: `seed,trial,learning_rate,weight_decay,patience,modularity,conductance,status`.
pub fn trial_log_csv(seeds: &[SeedHpo]) -> String {
    let mut out =
        String::from("seed,trial,learning_rate,weight_decay,patience,modularity,conductance,status\n");
    for s in seeds {
        for t in &s.trials {
            writeln!(
                out,
                "{},{},{},{},{},{:.6},{:.6},{}",
                t.seed,
                t.ordinal,
                t.point.learning_rate,
                t.point.weight_decay,
                t.point.patience,
                t.modularity,
                t.conductance,
                match t.status {
                    TrialStatus::Ok => "ok",
                    TrialStatus::Failed => "failed",
                }
            )
            .unwrap();
        }
    }
    out
}
