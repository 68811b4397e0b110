//! Builds the report tables from run records and renders them as
//! CSV files, scatter figures and a combined markdown report.

use super::svg::{scatter_csv, scatter_svg};
use super::{
    polyfit, r2_fit, signed_mae_shared, w_coefficient, AnalysisError, CellRankings, RankTable,
    METRIC_PAIRS,
};
use crate::metrics::MetricKind;
use crate::trainer::{RunRecord, SelectionMetric};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

/// One row of an overall-style table: a predictor→target pair with its
/// fitted correlations, rank randomness and selection regret.
#[derive(Debug, Clone, PartialEq)]
pub struct OverallRow {
    pub predictor: SelectionMetric,
    pub target: MetricKind,
    pub l_r2: Option<f64>,
    pub q_r2: Option<f64>,
    pub w: Option<f64>,
    pub mae: Option<f64>,
}

/// Per-algorithm or per-dataset q-R² row, columns in `METRIC_PAIRS` order.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceRow {
    pub name: String,
    pub q_r2: [Option<f64>; 4],
}

/// Synthetic-grid selection-regret row, columns in `METRIC_PAIRS` order.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthDeltaRow {
    pub dataset: String,
    pub delta: [Option<f64>; 4],
}

/// Scatter data with fitted curves for one metric pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPlot {
    pub predictor: SelectionMetric,
    pub target: MetricKind,
    pub points: Vec<(f64, f64)>,
    pub linear: Option<Vec<f64>>,
    pub quadratic: Option<Vec<f64>>,
}

/// Everything `build_tables` computes from one record set.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub overall: Vec<OverallRow>,
    pub per_algorithm: Vec<SliceRow>,
    pub per_dataset: Vec<SliceRow>,
    /// One table per reduced edge fraction, ascending.
    pub reduced: Vec<(f64, Vec<OverallRow>)>,
    pub synthetic_delta: Vec<SynthDeltaRow>,
    pub scatter: Vec<ScatterPlot>,
}

fn predictor_value(r: &RunRecord) -> f64 {
    match r.config.selection_metric {
        SelectionMetric::Modularity => r.finals.modularity,
        SelectionMetric::Conductance => r.finals.conductance,
    }
}

fn target_value(r: &RunRecord, target: MetricKind) -> Option<f64> {
    match target {
        MetricKind::Nmi => r.finals.nmi,
        MetricKind::F1 => r.finals.f1,
        _ => None,
    }
}

/// Rank table for one pair: cells are datasets, rankings of algorithms by
/// the target value, one ranking per seed. Seeds lacking a value for every
/// algorithm are dropped; cells with < 2 seeds or < 2 algorithms are
/// skipped.
fn pair_rank_table(records: &[&RunRecord], target: MetricKind) -> RankTable {
    let algorithms: BTreeSet<&str> = records.iter().map(|r| r.config.model.name()).collect();
    let algorithms: Vec<&str> = algorithms.into_iter().collect();
    let datasets: BTreeSet<&str> = records.iter().map(|r| r.config.dataset.as_str()).collect();
    let mut cells = Vec::new();
    if algorithms.len() < 2 {
        return RankTable { cells };
    }
    for dataset in datasets {
        let mut by_seed: BTreeMap<u64, BTreeMap<&str, f64>> = BTreeMap::new();
        for r in records {
            if r.config.dataset != dataset {
                continue;
            }
            if let Some(v) = target_value(r, target) {
                by_seed
                    .entry(r.config.seed)
                    .or_default()
                    .insert(r.config.model.name(), v);
            }
        }
        let mut rankings = Vec::new();
        for (_, values) in by_seed {
            if values.len() != algorithms.len() {
                continue;
            }
            let row: Vec<f64> = algorithms.iter().map(|a| values[a]).collect();
            rankings.push(super::rank_values(&row, target.direction()));
        }
        if rankings.len() >= 2 {
            cells.push(CellRankings {
                dataset: dataset.to_string(),
                metric: target,
                rankings,
            });
        }
    }
    RankTable { cells }
}

fn overall_rows(records: &[&RunRecord]) -> Vec<OverallRow> {
    METRIC_PAIRS
        .iter()
        .map(|&(predictor, target)| {
            let selected: Vec<&RunRecord> = records
                .iter()
                .copied()
                .filter(|r| r.config.selection_metric == predictor)
                .collect();
            let observations: Vec<(f64, f64)> = selected
                .iter()
                .filter_map(|r| target_value(r, target).map(|t| (predictor_value(r), t)))
                .collect();
            let l_r2 = r2_fit(&observations, 1).ok();
            let q_r2 = r2_fit(&observations, 2).ok();
            let table = pair_rank_table(&selected, target);
            let w = w_coefficient(&table).ok();
            let mae = signed_mae_shared(&selected, target);
            OverallRow {
                predictor,
                target,
                l_r2,
                q_r2,
                w,
                mae,
            }
        })
        .collect()
}

fn slice_rows<F>(records: &[&RunRecord], key: F) -> Vec<SliceRow>
where
    F: Fn(&RunRecord) -> String,
{
    let names: BTreeSet<String> = records.iter().map(|r| key(r)).collect();
    names
        .into_iter()
        .map(|name| {
            let subset: Vec<&RunRecord> = records
                .iter()
                .copied()
                .filter(|r| key(r) == name)
                .collect();
            let mut q_r2 = [None; 4];
            for (i, &(predictor, target)) in METRIC_PAIRS.iter().enumerate() {
                let observations: Vec<(f64, f64)> = subset
                    .iter()
                    .filter(|r| r.config.selection_metric == predictor)
                    .filter_map(|r| target_value(r, target).map(|t| (predictor_value(r), t)))
                    .collect();
                q_r2[i] = r2_fit(&observations, 2).ok();
            }
            SliceRow { name, q_r2 }
        })
        .collect()
}

/// Computes every table the report carries from one framework's records.
pub fn build_tables(records: &[RunRecord]) -> Result<AnalysisReport, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::EmptyRecords);
    }
    let full: Vec<&RunRecord> = records
        .iter()
        .filter(|r| r.config.edge_fraction == 1.0)
        .collect();
    let overall = overall_rows(&full);
    let per_algorithm = slice_rows(&full, |r| r.config.model.name().to_string());
    let per_dataset = slice_rows(&full, |r| r.config.dataset.clone());

    let mut fractions: BTreeSet<String> = BTreeSet::new();
    for r in records {
        if r.config.edge_fraction < 1.0 {
            fractions.insert(format!("{}", r.config.edge_fraction));
        }
    }
    let mut reduced = Vec::new();
    for f in fractions {
        let fraction: f64 = f.parse().expect("formatted from f64");
        let subset: Vec<&RunRecord> = records
            .iter()
            .filter(|r| format!("{}", r.config.edge_fraction) == f)
            .collect();
        reduced.push((fraction, overall_rows(&subset)));
    }
    reduced.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let synth_names: BTreeSet<String> = full
        .iter()
        .filter(|r| r.config.dataset.starts_with("synth-"))
        .map(|r| r.config.dataset.clone())
        .collect();
    let synthetic_delta = synth_names
        .into_iter()
        .map(|dataset| {
            let mut delta = [None; 4];
            for (i, &(predictor, target)) in METRIC_PAIRS.iter().enumerate() {
                let subset: Vec<&RunRecord> = full
                    .iter()
                    .copied()
                    .filter(|r| {
                        r.config.dataset == dataset && r.config.selection_metric == predictor
                    })
                    .collect();
                delta[i] = signed_mae_shared(&subset, target);
            }
            SynthDeltaRow { dataset, delta }
        })
        .collect();

    let scatter = METRIC_PAIRS
        .iter()
        .map(|&(predictor, target)| {
            let points: Vec<(f64, f64)> = full
                .iter()
                .filter(|r| r.config.selection_metric == predictor)
                .filter_map(|r| target_value(r, target).map(|t| (predictor_value(r), t)))
                .collect();
            ScatterPlot {
                predictor,
                target,
                linear: polyfit(&points, 1).ok(),
                quadratic: polyfit(&points, 2).ok(),
                points,
            }
        })
        .collect();

    Ok(AnalysisReport {
        overall,
        per_algorithm,
        per_dataset,
        reduced,
        synthetic_delta,
        scatter,
    })
}

fn fmt_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

fn pair_label(predictor: SelectionMetric, target: MetricKind) -> String {
    format!("{}->{}", predictor.name(), target.name())
}

fn overall_csv(rows: &[OverallRow]) -> String {
    let mut out = String::from("pair,l_r2,q_r2,w,mae\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            pair_label(r.predictor, r.target),
            fmt_cell(r.l_r2),
            fmt_cell(r.q_r2),
            fmt_cell(r.w),
            fmt_cell(r.mae)
        )
        .unwrap();
    }
    out
}

fn slice_csv(rows: &[SliceRow], key_name: &str) -> String {
    let mut out = format!(
        "{key_name},{},{},{},{}\n",
        "mod_to_f1", "mod_to_nmi", "cond_to_f1", "cond_to_nmi"
    );
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.name,
            fmt_cell(r.q_r2[0]),
            fmt_cell(r.q_r2[1]),
            fmt_cell(r.q_r2[2]),
            fmt_cell(r.q_r2[3])
        )
        .unwrap();
    }
    out
}

fn markdown_overall(out: &mut String, rows: &[OverallRow]) {
    out.push_str("| pair | l-R² | q-R² | W | MAE |\n|---|---|---|---|---|\n");
    for r in rows {
        writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            pair_label(r.predictor, r.target),
            fmt_cell(r.l_r2),
            fmt_cell(r.q_r2),
            fmt_cell(r.w),
            fmt_cell(r.mae)
        )
        .unwrap();
    }
}

/// Renders one or more framework reports (plus an optional FCR comparison)
/// into a deterministic set of (relative path, contents) files.
pub fn render_report(
    frameworks: &[(String, AnalysisReport)],
    fcr: Option<&[(String, f64)]>,
) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = Vec::new();
    let mut md = String::new();
    md.push_str("# Analysis report\n\n");
    md.push_str(
        "Correlations between unsupervised selection metrics and ground-truth \
         performance. W for each pair is computed from that predictor's runs only.\n\n",
    );

    if let Some(fcr_rows) = fcr {
        let mut csv = String::from("framework,fcr\n");
        md.push_str("## Framework comparison rank\n\n| framework | FCR |\n|---|---|\n");
        for (name, value) in fcr_rows {
            writeln!(csv, "{name},{value:.4}").unwrap();
            writeln!(md, "| {name} | {value:.4} |").unwrap();
        }
        md.push('\n');
        files.push(("tables/fcr.csv".into(), csv));
    }

    for (name, report) in frameworks {
        writeln!(md, "## Framework: {name}\n").unwrap();
        md.push_str("### Overall\n\n");
        markdown_overall(&mut md, &report.overall);
        md.push('\n');
        files.push((
            format!("tables/overall_{name}.csv"),
            overall_csv(&report.overall),
        ));

        if !report.per_algorithm.is_empty() {
            files.push((
                format!("tables/per_algorithm_{name}.csv"),
                slice_csv(&report.per_algorithm, "algorithm"),
            ));
            md.push_str("### Per-algorithm q-R²\n\n");
            md.push_str("| algorithm | M→F1 | M→NMI | C→F1 | C→NMI |\n|---|---|---|---|---|\n");
            for r in &report.per_algorithm {
                writeln!(
                    md,
                    "| {} | {} | {} | {} | {} |",
                    r.name,
                    fmt_cell(r.q_r2[0]),
                    fmt_cell(r.q_r2[1]),
                    fmt_cell(r.q_r2[2]),
                    fmt_cell(r.q_r2[3])
                )
                .unwrap();
            }
            md.push('\n');
        }
        if !report.per_dataset.is_empty() {
            files.push((
                format!("tables/per_dataset_{name}.csv"),
                slice_csv(&report.per_dataset, "dataset"),
            ));
            md.push_str("### Per-dataset q-R²\n\n");
            md.push_str("| dataset | M→F1 | M→NMI | C→F1 | C→NMI |\n|---|---|---|---|---|\n");
            for r in &report.per_dataset {
                writeln!(
                    md,
                    "| {} | {} | {} | {} | {} |",
                    r.name,
                    fmt_cell(r.q_r2[0]),
                    fmt_cell(r.q_r2[1]),
                    fmt_cell(r.q_r2[2]),
                    fmt_cell(r.q_r2[3])
                )
                .unwrap();
            }
            md.push('\n');
        }

        for (fraction, rows) in &report.reduced {
            files.push((
                format!("tables/reduced_{fraction}_{name}.csv"),
                overall_csv(rows),
            ));
            writeln!(md, "### Reduced edges: fraction {fraction}\n").unwrap();
            markdown_overall(&mut md, rows);
            md.push('\n');
        }

        if !report.synthetic_delta.is_empty() {
            let mut csv = String::from("dataset,mod_to_f1,mod_to_nmi,cond_to_f1,cond_to_nmi\n");
            md.push_str("### Synthetic selection regret\n\n");
            md.push_str("| dataset | M→F1 | M→NMI | C→F1 | C→NMI |\n|---|---|---|---|---|\n");
            for r in &report.synthetic_delta {
                writeln!(
                    csv,
                    "{},{},{},{},{}",
                    r.dataset,
                    fmt_cell(r.delta[0]),
                    fmt_cell(r.delta[1]),
                    fmt_cell(r.delta[2]),
                    fmt_cell(r.delta[3])
                )
                .unwrap();
                writeln!(
                    md,
                    "| {} | {} | {} | {} | {} |",
                    r.dataset,
                    fmt_cell(r.delta[0]),
                    fmt_cell(r.delta[1]),
                    fmt_cell(r.delta[2]),
                    fmt_cell(r.delta[3])
                )
                .unwrap();
            }
            md.push('\n');
            files.push((format!("tables/synthetic_delta_{name}.csv"), csv));
        }

        for plot in &report.scatter {
            let slug = format!("{}_{}", plot.predictor.name(), plot.target.name());
            files.push((
                format!("figures/scatter_{slug}_{name}.svg"),
                scatter_svg(plot),
            ));
            files.push((
                format!("figures/scatter_{slug}_{name}.csv"),
                scatter_csv(plot),
            ));
        }
    }

    files.push(("report.md".into(), md));
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}
