//! Correlation and ranking statistics over completed run grids: linear and
//! quadratic R², signed MAE against label-guided selection, the W
//! randomness coefficient, and the framework comparison rank.

pub mod report;
pub mod svg;

use crate::metrics::{Direction, MetricKind};
use crate::trainer::{RunRecord, SelectionMetric};
use std::collections::BTreeMap;
use thiserror::Error;

pub use report::{build_tables, render_report, AnalysisReport, OverallRow, SliceRow, SynthDeltaRow};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least {needed} observations for a degree-{degree} fit, got {got}")]
    TooFewPoints {
        needed: usize,
        degree: usize,
        got: usize,
    },
    #[error("fit degree {0} unsupported (1 or 2)")]
    BadDegree(usize),
    #[error("run sets are not paired: {0}")]
    UnpairedRuns(String),
    #[error("rank table needs ≥2 seeds and ≥2 algorithms per cell")]
    DegenerateRankTable,
    #[error("framework grids do not match: {0}")]
    MismatchedGrids(String),
    #[error("fcr needs at least 2 frameworks")]
    TooFewFrameworks,
    #[error("empty record set")]
    EmptyRecords,
}

/// Paired (unsupervised predictor, supervised target) observations.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricPair {
    pub predictor: MetricKind,
    pub target: MetricKind,
    pub observations: Vec<(f64, f64)>,
}

/// The four predictor→target pairs every table reports, in row order.
pub const METRIC_PAIRS: [(SelectionMetric, MetricKind); 4] = [
    (SelectionMetric::Modularity, MetricKind::F1),
    (SelectionMetric::Modularity, MetricKind::Nmi),
    (SelectionMetric::Conductance, MetricKind::F1),
    (SelectionMetric::Conductance, MetricKind::Nmi),
];

/// Least-squares polynomial fit by sequential orthogonalization.
///
/// Fitting the quadratic term on the linear residual guarantees
/// `SS_res(quad) ≤ SS_res(linear)` in floating point, so the nested-model
/// property `q-R² ≥ l-R²` holds by construction.
struct OrthoFit {
    ss_tot: f64,
    ss_res_linear: f64,
    ss_res_quadratic: f64,
    /// Monomial coefficients `a0 + a1·x` of the linear fit.
    linear_coeffs: [f64; 2],
    /// Monomial coefficients `a0 + a1·x + a2·x²` of the quadratic fit.
    quadratic_coeffs: [f64; 3],
}

fn ortho_fit(points: &[(f64, f64)]) -> OrthoFit {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mean_x2 = points.iter().map(|p| p.0 * p.0).sum::<f64>() / n;

    // Basis: 1, z1 = x − x̄, z2 = x² − mean(x²) − γ·z1 with γ chosen so
    // z2 ⊥ z1.
    let z1: Vec<f64> = points.iter().map(|p| p.0 - mean_x).collect();
    let z1_sq: f64 = z1.iter().map(|v| v * v).sum();
    let x2_dot_z1: f64 = points
        .iter()
        .zip(&z1)
        .map(|(p, &z)| p.0 * p.0 * z)
        .sum();
    let gamma = if z1_sq > 0.0 { x2_dot_z1 / z1_sq } else { 0.0 };
    let z2: Vec<f64> = points
        .iter()
        .zip(&z1)
        .map(|(p, &z)| p.0 * p.0 - mean_x2 - gamma * z)
        .collect();
    let z2_sq: f64 = z2.iter().map(|v| v * v).sum();

    let r0: Vec<f64> = points.iter().map(|p| p.1 - mean_y).collect();
    let ss_tot: f64 = r0.iter().map(|v| v * v).sum();

    let r0_dot_z1: f64 = r0.iter().zip(&z1).map(|(a, b)| a * b).sum();
    let beta1 = if z1_sq > 0.0 { r0_dot_z1 / z1_sq } else { 0.0 };
    let ss_res_linear = (ss_tot - beta1 * beta1 * z1_sq).max(0.0);

    let r1: Vec<f64> = r0.iter().zip(&z1).map(|(a, &z)| a - beta1 * z).collect();
    let r1_dot_z2: f64 = r1.iter().zip(&z2).map(|(a, b)| a * b).sum();
    let beta2 = if z2_sq > 0.0 { r1_dot_z2 / z2_sq } else { 0.0 };
    let ss_res_quadratic = (ss_res_linear - beta2 * beta2 * z2_sq).max(0.0);

    let linear_coeffs = [mean_y - beta1 * mean_x, beta1];
    let quadratic_coeffs = [
        mean_y - beta1 * mean_x - beta2 * (mean_x2 - gamma * mean_x),
        beta1 - beta2 * gamma,
        beta2,
    ];
    OrthoFit {
        ss_tot,
        ss_res_linear,
        ss_res_quadratic,
        linear_coeffs,
        quadratic_coeffs,
    }
}

/// `R² = 1 − SS_res/SS_tot` of the least-squares polynomial fit of the given
/// degree (1 or 2). A constant-target sample scores 0.
pub fn r2_fit(points: &[(f64, f64)], degree: usize) -> Result<f64, AnalysisError> {
    if !(degree == 1 || degree == 2) {
        return Err(AnalysisError::BadDegree(degree));
    }
    if points.len() < degree + 2 {
        return Err(AnalysisError::TooFewPoints {
            needed: degree + 2,
            degree,
            got: points.len(),
        });
    }
    let fit = ortho_fit(points);
    if fit.ss_tot == 0.0 {
        return Ok(0.0);
    }
    let ss_res = if degree == 1 {
        fit.ss_res_linear
    } else {
        fit.ss_res_quadratic
    };
    Ok(1.0 - ss_res / fit.ss_tot)
}

/// Monomial coefficients (low order first) of the degree-1 or degree-2
/// least-squares fit; used to draw fitted curves.
pub fn polyfit(points: &[(f64, f64)], degree: usize) -> Result<Vec<f64>, AnalysisError> {
    if !(degree == 1 || degree == 2) {
        return Err(AnalysisError::BadDegree(degree));
    }
    if points.len() < degree + 2 {
        return Err(AnalysisError::TooFewPoints {
            needed: degree + 2,
            degree,
            got: points.len(),
        });
    }
    let fit = ortho_fit(points);
    Ok(if degree == 1 {
        fit.linear_coeffs.to_vec()
    } else {
        fit.quadratic_coeffs.to_vec()
    })
}

fn run_key(r: &RunRecord) -> (String, String, u64, String) {
    (
        r.config.model.name().to_string(),
        r.config.dataset.clone(),
        r.config.seed,
        format!("{}", r.config.edge_fraction),
    )
}

/// Mean over paired runs of (target under unsupervised selection − target
/// under supervised selection). Pairs on (model, dataset, seed, fraction).
pub fn signed_mae(
    unsup: &[&RunRecord],
    sup: &[&RunRecord],
    target: MetricKind,
) -> Result<f64, AnalysisError> {
    if unsup.is_empty() {
        return Err(AnalysisError::EmptyRecords);
    }
    let mut sup_by_key: BTreeMap<_, &RunRecord> = BTreeMap::new();
    for r in sup {
        sup_by_key.insert(run_key(r), *r);
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for u in unsup {
        let key = run_key(u);
        let s = sup_by_key
            .get(&key)
            .ok_or_else(|| AnalysisError::UnpairedRuns(format!("{key:?}")))?;
        total += u.final_metric(target) - s.final_metric(target);
        count += 1;
    }
    Ok(total / count as f64)
}

/// Signed MAE on shared trajectories: the supervised side re-selects the
/// best epoch of the same run by the target metric, which the trajectory
/// records make exact. Runs without label access are skipped; `None` when
/// nothing qualifies.
pub fn signed_mae_shared(records: &[&RunRecord], target: MetricKind) -> Option<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for r in records {
        let (Some(unsup_value), Some(sup_value)) = (
            match target {
                MetricKind::Nmi => r.finals.nmi,
                MetricKind::F1 => r.finals.f1,
                _ => None,
            },
            r.supervised_selection_value(target),
        ) else {
            continue;
        };
        total += unsup_value - sup_value;
        count += 1;
    }
    (count > 0).then(|| total / count as f64)
}

/// Average ranks (1 = best) with average-rank ties, respecting direction.
pub fn rank_values(values: &[f64], direction: Direction) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| match direction {
        Direction::Maximize => values[b].partial_cmp(&values[a]).unwrap(),
        Direction::Minimize => values[a].partial_cmp(&values[b]).unwrap(),
    });
    let mut ranks = vec![0.0f64; n];
    let mut i = 0usize;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Rankings of the algorithms per (dataset, metric) cell, one ranking per
/// seed. Ranks are 1-based with average-rank ties.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub cells: Vec<CellRankings>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellRankings {
    pub dataset: String,
    pub metric: MetricKind,
    /// `rankings[seed][algorithm]` = rank.
    pub rankings: Vec<Vec<f64>>,
}

/// Tie-corrected Kendall's coefficient of concordance for one cell.
/// Identical (possibly tied) rankings give 1.
fn kendalls_w(rankings: &[Vec<f64>]) -> f64 {
    let m = rankings.len() as f64;
    let n = rankings[0].len() as f64;
    let mut rank_sums = vec![0.0f64; rankings[0].len()];
    for ranking in rankings {
        for (acc, &r) in rank_sums.iter_mut().zip(ranking) {
            *acc += r;
        }
    }
    let mean_sum = m * (n + 1.0) / 2.0;
    let s: f64 = rank_sums.iter().map(|&r| (r - mean_sum).powi(2)).sum();

    let mut tie_total = 0.0;
    for ranking in rankings {
        let mut sorted = ranking.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut i = 0usize;
        while i < sorted.len() {
            let mut j = i;
            while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            tie_total += t * t * t - t;
            i = j + 1;
        }
    }
    let denom = m * m * (n * n * n - n) - m * tie_total;
    if denom <= 0.0 {
        // every ranking fully tied: concordant by convention
        return 1.0;
    }
    12.0 * s / denom
}

/// The W randomness coefficient: `1 − W_kendall` per (dataset, metric)
/// cell, averaged over cells. 0 means perfectly consistent rankings across
/// seeds.
pub fn w_coefficient(table: &RankTable) -> Result<f64, AnalysisError> {
    if table.cells.is_empty() {
        return Err(AnalysisError::DegenerateRankTable);
    }
    let mut total = 0.0;
    for cell in &table.cells {
        if cell.rankings.len() < 2 || cell.rankings[0].len() < 2 {
            return Err(AnalysisError::DegenerateRankTable);
        }
        for r in &cell.rankings {
            if r.len() != cell.rankings[0].len() {
                return Err(AnalysisError::DegenerateRankTable);
            }
        }
        total += 1.0 - kendalls_w(&cell.rankings);
    }
    Ok(total / table.cells.len() as f64)
}

/// Framework comparison rank: over an identical (model, dataset, seed,
/// selection metric, fraction) × metric grid, rank the frameworks per cell
/// (respecting metric direction) and average per framework.
pub fn fcr(
    frameworks: &[(String, Vec<&RunRecord>)],
) -> Result<Vec<(String, f64)>, AnalysisError> {
    if frameworks.len() < 2 {
        return Err(AnalysisError::TooFewFrameworks);
    }
    type Key = (String, String, u64, String, String);
    let mut per_framework: Vec<BTreeMap<Key, &RunRecord>> = Vec::new();
    for (name, records) in frameworks {
        let mut map = BTreeMap::new();
        for r in records {
            let (model, dataset, seed, fraction) = run_key(r);
            let key = (
                model,
                dataset,
                seed,
                r.config.selection_metric.name().to_string(),
                fraction,
            );
            if map.insert(key.clone(), *r).is_some() {
                return Err(AnalysisError::MismatchedGrids(format!(
                    "duplicate cell {key:?} in framework {name}"
                )));
            }
        }
        per_framework.push(map);
    }
    let reference: Vec<Key> = per_framework[0].keys().cloned().collect();
    for (i, map) in per_framework.iter().enumerate() {
        if map.len() != reference.len() || !reference.iter().all(|k| map.contains_key(k)) {
            return Err(AnalysisError::MismatchedGrids(format!(
                "framework {} covers a different grid",
                frameworks[i].0
            )));
        }
    }

    let mut totals = vec![0.0f64; frameworks.len()];
    let mut cells = 0usize;
    for key in &reference {
        for metric in [
            MetricKind::Modularity,
            MetricKind::Conductance,
            MetricKind::Nmi,
            MetricKind::F1,
        ] {
            let optional = matches!(metric, MetricKind::Nmi | MetricKind::F1);
            if optional {
                let all_have = per_framework.iter().all(|m| {
                    let r = m[key];
                    match metric {
                        MetricKind::Nmi => r.finals.nmi.is_some(),
                        MetricKind::F1 => r.finals.f1.is_some(),
                        _ => true,
                    }
                });
                if !all_have {
                    continue;
                }
            }
            let values: Vec<f64> = per_framework
                .iter()
                .map(|m| m[key].final_metric(metric))
                .collect();
            let ranks = rank_values(&values, metric.direction());
            for (acc, r) in totals.iter_mut().zip(&ranks) {
                *acc += r;
            }
            cells += 1;
        }
    }
    if cells == 0 {
        return Err(AnalysisError::EmptyRecords);
    }
    Ok(frameworks
        .iter()
        .map(|(name, _)| name.clone())
        .zip(totals.iter().map(|t| t / cells as f64))
        .collect())
}
