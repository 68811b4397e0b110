//! The generate / run / analyze entry points.

use crate::config::{Experiment, ExperimentConfig};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use ugs_core::analysis::{build_tables, fcr, render_report, AnalysisReport};
use ugs_core::dataset::{load_named_dataset, save_dataset, EdgeConvention};
use ugs_core::hpo::{run_hpo, trial_log_csv, SearchSpace, SeedHpo};
use ugs_core::synthgen::{self, PartitionSignal, SynthSpec};
use ugs_core::trainer::{
    aggregate_csv, build_grid, run_grid, GridHyperParams, NamedDataset, RunConfig, RunRecord,
    RESULTS_SCHEMA_VERSION,
};

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    schema_version: String,
    experiment: String,
    config_hash: String,
    n_runs: usize,
}

fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// `generate`: write synthetic dataset directories in the dataset format.
pub struct GenerateArgs {
    pub grid: bool,
    pub adj: Option<String>,
    pub feat: Option<String>,
    pub n_nodes: usize,
    pub n_features: usize,
    pub k: usize,
    pub seed: u64,
    pub p_edge: f64,
    pub p_feat: f64,
    pub out: PathBuf,
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let mut base = SynthSpec::new(PartitionSignal::Distinct, PartitionSignal::Distinct, args.seed);
    base.n_nodes = args.n_nodes;
    base.n_features = args.n_features;
    base.k = args.k;
    base.p_edge_random = args.p_edge;
    base.p_feat_random = args.p_feat;

    let specs: Vec<SynthSpec> = if args.grid {
        synthgen::grid(&base)
    } else {
        let parse = |s: &Option<String>, which: &str| -> Result<PartitionSignal> {
            let s = s
                .as_deref()
                .ok_or_else(|| anyhow::anyhow!("--{which} required without --grid"))?;
            PartitionSignal::parse(s)
                .ok_or_else(|| anyhow::anyhow!("bad --{which} {s:?} (distinct|random|null)"))
        };
        let mut spec = base;
        spec.adj_mode = parse(&args.adj, "adj")?;
        spec.feat_mode = parse(&args.feat, "feat")?;
        vec![spec]
    };

    for spec in &specs {
        let graph = synthgen::generate(spec)?;
        let name = spec.dataset_name();
        let dir = args.out.join(&name);
        save_dataset(&graph, &name, EdgeConvention::Unordered, &dir)?;
        println!(
            "wrote {} ({} nodes, {} edges, {} features)",
            dir.display(),
            graph.n_nodes(),
            graph.n_edges(),
            graph.n_features()
        );
    }
    Ok(())
}

fn load_datasets(cfg: &ExperimentConfig) -> Result<Vec<NamedDataset>> {
    if cfg.experiment == Experiment::Synthetic {
        let mut base = SynthSpec::new(
            PartitionSignal::Distinct,
            PartitionSignal::Distinct,
            cfg.synth_seed,
        );
        base.n_nodes = cfg.synth_n;
        base.n_features = cfg.synth_d;
        base.k = cfg.synth_k;
        base.p_edge_random = cfg.synth_p_edge;
        base.p_feat_random = cfg.synth_p_feat;
        return synthgen::grid(&base)
            .iter()
            .map(|spec| {
                let graph = synthgen::generate(spec)?;
                Ok(NamedDataset::new(&spec.dataset_name(), graph))
            })
            .collect();
    }
    cfg.datasets
        .iter()
        .map(|dir| {
            let (name, graph) = load_named_dataset(Path::new(dir))
                .with_context(|| format!("loading dataset {dir}"))?;
            Ok(NamedDataset::new(&name, graph))
        })
        .collect()
}

fn run_slug(r: &RunRecord) -> String {
    format!(
        "run-{:05}-{}-{}-{}-{}-f{}",
        r.config.run_ordinal,
        r.config.model.name(),
        r.config.dataset,
        r.config.seed,
        r.config.selection_metric.name(),
        r.config.edge_fraction
    )
}

fn print_run_line(r: &RunRecord) {
    println!(
        "{} -> mod={:.4} cond={:.4} nmi={} f1={} epoch={} {} ({:.1}s)",
        run_slug(r),
        r.finals.modularity,
        r.finals.conductance,
        r.finals
            .nmi
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "-".into()),
        r.finals
            .f1
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "-".into()),
        r.selected_epoch,
        if r.is_ok() { "[ok]" } else { "[failed]" },
        r.wall_secs,
    );
}

fn write_results(cfg: &ExperimentConfig, records: &[RunRecord]) -> Result<PathBuf> {
    let grid_dir = cfg.grid_dir();
    fs::create_dir_all(&grid_dir)?;
    let manifest = Manifest {
        schema_version: RESULTS_SCHEMA_VERSION.to_string(),
        experiment: cfg.experiment.name().to_string(),
        config_hash: cfg.hash(),
        n_runs: records.len(),
    };
    let mut manifest_json = serde_json::to_string_pretty(&manifest)?;
    manifest_json.push('\n');
    write_text(&grid_dir.join("manifest.json"), &manifest_json)?;
    write_text(&grid_dir.join("aggregate.csv"), &aggregate_csv(records))?;
    for r in records {
        let mut json = serde_json::to_string_pretty(r)?;
        json.push('\n');
        write_text(&grid_dir.join("runs").join(format!("{}.json", run_slug(r))), &json)?;
    }
    Ok(grid_dir)
}

fn hpo_records(
    cfg: &ExperimentConfig,
    datasets: &[NamedDataset],
) -> Result<(Vec<RunRecord>, Vec<SeedHpo>)> {
    let space = SearchSpace {
        max_trials: cfg.max_trials,
        ..SearchSpace::default()
    };
    let settings = cfg.train_settings();
    let workers = cfg.resolved_workers();
    let mut records = Vec::new();
    let mut all_seed_logs = Vec::new();
    for ds in datasets {
        for model in cfg.model_kinds() {
            for metric in cfg.metric_kinds() {
                let outcome = run_hpo(
                    model,
                    ds,
                    &space,
                    &cfg.seeds,
                    metric,
                    cfg.max_epochs,
                    &settings,
                    workers,
                )?;
                for seed_hpo in &outcome {
                    // Re-running the winning trial's config reproduces its
                    // record bit for bit (training is a pure function of
                    // config and graph).
                    let best = &seed_hpo.best;
                    let mut run_cfg = RunConfig::new(model, &ds.name, seed_hpo.seed, ds.k);
                    run_cfg.run_ordinal = best.ordinal as u64;
                    run_cfg.learning_rate = best.point.learning_rate;
                    run_cfg.weight_decay = best.point.weight_decay;
                    run_cfg.patience = best.point.patience;
                    run_cfg.max_epochs = cfg.max_epochs;
                    run_cfg.selection_metric = metric;
                    run_cfg.settings = settings.clone();
                    let record = ugs_core::trainer::train_run(&run_cfg, &ds.graph)?;
                    print_run_line(&record);
                    records.push(record);
                }
                all_seed_logs.extend(outcome);
            }
        }
    }
    Ok((records, all_seed_logs))
}

/// `run`: execute the configured experiment grid; returns the results
/// directory and whether every run succeeded.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<(PathBuf, bool)> {
    let datasets = load_datasets(cfg)?;
    let records = match cfg.experiment {
        Experiment::Analyze => {
            let dirs: Vec<PathBuf> = cfg.results_dirs.iter().map(PathBuf::from).collect();
            let out = cmd_analyze(&dirs, &cfg.grid_dir().join("report"))?;
            println!("report in {}", out.display());
            return Ok((out, true));
        }
        Experiment::Hpo => {
            let (records, seed_logs) = hpo_records(cfg, &datasets)?;
            let grid_dir = cfg.grid_dir();
            fs::create_dir_all(&grid_dir)?;
            write_text(&grid_dir.join("trials.csv"), &trial_log_csv(&seed_logs))?;
            records
        }
        _ => {
            let grid = build_grid(
                &cfg.model_kinds(),
                &datasets,
                &cfg.seeds,
                &cfg.metric_kinds(),
                &cfg.edge_fractions,
                &GridHyperParams {
                    learning_rate: cfg.learning_rate,
                    weight_decay: cfg.weight_decay,
                    patience: cfg.patience,
                    max_epochs: cfg.max_epochs,
                },
                &cfg.train_settings(),
            );
            let records = run_grid(grid, cfg.resolved_workers());
            for r in &records {
                print_run_line(r);
            }
            records
        }
    };
    let all_ok = records.iter().all(|r| r.is_ok());
    let dir = write_results(cfg, &records)?;
    println!(
        "{} runs ({} failed) -> {}",
        records.len(),
        records.iter().filter(|r| !r.is_ok()).count(),
        dir.display()
    );
    Ok((dir, all_ok))
}

fn read_results_dir(dir: &Path) -> Result<(String, Vec<RunRecord>)> {
    let manifest_path = dir.join("manifest.json");
    let manifest: Manifest = serde_json::from_str(
        &fs::read_to_string(&manifest_path)
            .with_context(|| format!("cannot read {}", manifest_path.display()))?,
    )
    .with_context(|| format!("malformed manifest {}", manifest_path.display()))?;
    if manifest.schema_version != RESULTS_SCHEMA_VERSION {
        bail!(
            "schema version mismatch in {}: found {:?}, this build reads {:?}",
            dir.display(),
            manifest.schema_version,
            RESULTS_SCHEMA_VERSION
        );
    }
    let runs_dir = dir.join("runs");
    let mut names: Vec<PathBuf> = fs::read_dir(&runs_dir)
        .with_context(|| format!("cannot list {}", runs_dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    names.sort();
    let mut records = Vec::new();
    for path in names {
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let record: RunRecord = serde_json::from_str(
            &fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?,
        )
        .with_context(|| format!("malformed run record {}", path.display()))?;
        if record.schema != RESULTS_SCHEMA_VERSION {
            bail!(
                "schema version mismatch in {}: found {:?}",
                path.display(),
                record.schema
            );
        }
        records.push(record);
    }
    if records.is_empty() {
        bail!("no run records in {}", runs_dir.display());
    }
    let label = format!("{}-{}", manifest.experiment, &manifest.config_hash[..8]);
    Ok((label, records))
}

/// `analyze`: build every table from one or more results directories; FCR
/// appears when at least two are given.
pub fn cmd_analyze(results_dirs: &[PathBuf], out: &Path) -> Result<PathBuf> {
    if results_dirs.is_empty() {
        bail!("analyze needs at least one results directory");
    }
    let mut frameworks: Vec<(String, Vec<RunRecord>)> = Vec::new();
    for dir in results_dirs {
        frameworks.push(read_results_dir(dir)?);
    }
    let reports: Vec<(String, AnalysisReport)> = frameworks
        .iter()
        .map(|(name, records)| Ok((name.clone(), build_tables(records)?)))
        .collect::<Result<_>>()?;
    let fcr_rows = if frameworks.len() >= 2 {
        let refs: Vec<(String, Vec<&RunRecord>)> = frameworks
            .iter()
            .map(|(n, rs)| (n.clone(), rs.iter().collect()))
            .collect();
        Some(fcr(&refs)?)
    } else {
        None
    };
    let files = render_report(&reports, fcr_rows.as_deref());
    for (rel, contents) in &files {
        write_text(&out.join(rel), contents)?;
    }
    println!("wrote {} report files to {}", files.len(), out.display());
    Ok(out.to_path_buf())
}
