//! End-to-end CLI checks, including the determinism criterion: run twice →
//! byte-identical aggregate CSVs; analyze twice → byte-identical reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ugs")
}

fn temp_root(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ugs-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(path: &Path, output_dir: &Path, extra: &str) {
    fs::write(
        path,
        format!(
            "experiment = \"synthetic\"\n\
             seeds = [42, 24]\n\
             models = [\"dmon\", \"dgi\"]\n\
             selection_metrics = [\"modularity\"]\n\
             synth_n = 40\n\
             synth_d = 16\n\
             max_epochs = 20\n\
             patience = 10\n\
             hidden_dims = [8]\n\
             eval_interval = 5\n\
             workers = 2\n\
             output_dir = {:?}\n\
             {extra}",
            output_dir.display()
        ),
    )
    .unwrap();
}

fn collect_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

/// Criterion 10: rerunning an identical config reproduces the aggregate CSV
/// byte for byte, and rerunning analyze reproduces the whole report tree.
#[test]
fn criterion_10_end_to_end_determinism() {
    let root = temp_root("determinism");
    let config = root.join("run.toml");
    write_config(&config, &root.join("results"), "");

    let out1 = run(&["run", "--config", config.to_str().unwrap()], &[]);
    assert!(out1.status.success(), "{}", String::from_utf8_lossy(&out1.stderr));
    let grid_dir = fs::read_dir(root.join("results"))
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let first_csv = fs::read(grid_dir.join("aggregate.csv")).unwrap();

    let out2 = run(&["run", "--config", config.to_str().unwrap()], &[]);
    assert!(out2.status.success());
    let second_csv = fs::read(grid_dir.join("aggregate.csv")).unwrap();
    assert_eq!(first_csv, second_csv, "aggregate CSVs differ between reruns");

    let report_a = root.join("report-a");
    let report_b = root.join("report-b");
    for report in [&report_a, &report_b] {
        let out = run(
            &[
                "analyze",
                grid_dir.to_str().unwrap(),
                "--out",
                report.to_str().unwrap(),
            ],
            &[],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let files_a = collect_files(&report_a);
    let files_b = collect_files(&report_b);
    assert_eq!(files_a.len(), files_b.len());
    for ((name_a, bytes_a), (name_b, bytes_b)) in files_a.iter().zip(&files_b) {
        assert_eq!(name_a, name_b);
        assert_eq!(bytes_a, bytes_b, "report file {name_a} differs");
    }
    println!(
        "criterion 10 PASS: aggregate CSV and {}-file report byte-identical across reruns",
        files_a.len()
    );
    let _ = fs::remove_dir_all(&root);
}

#[test]
fn generate_is_deterministic_and_counts_match() {
    let root = temp_root("generate");
    for sub in ["a", "b"] {
        let out = run(
            &[
                "generate",
                "--grid",
                "--n",
                "30",
                "--d",
                "10",
                "--seed",
                "42",
                "--out",
                root.join(sub).to_str().unwrap(),
            ],
            &[],
        );
        assert!(out.status.success());
    }
    let a = collect_files(&root.join("a"));
    let b = collect_files(&root.join("b"));
    assert_eq!(a, b, "generate output differs between identical invocations");
    // 9 datasets × 4 files (meta, edges, features, labels)
    assert_eq!(a.len(), 36);
    let _ = fs::remove_dir_all(&root);
}

#[test]
fn invalid_config_exits_2() {
    let root = temp_root("invalid");
    let config = root.join("bad.toml");
    fs::write(&config, "experiment = \"default-hp\"\n").unwrap(); // no datasets
    let out = run(&["run", "--config", config.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));

    let missing = run(&["run", "--config", root.join("nope.toml").to_str().unwrap()], &[]);
    assert_eq!(missing.status.code(), Some(2));
    let _ = fs::remove_dir_all(&root);
}

#[test]
fn failed_runs_exit_1_and_are_recorded() {
    let root = temp_root("failed");
    // A dataset with a NaN feature drives the loss non-finite immediately.
    let ds = root.join("nan-ds");
    fs::create_dir_all(&ds).unwrap();
    fs::write(
        ds.join("meta.json"),
        "{\"name\":\"nan-ds\",\"n_nodes\":4,\"n_features\":2,\"n_classes\":2,\"edge_convention\":\"unordered\"}",
    )
    .unwrap();
    fs::write(ds.join("edges.tsv"), "0\t1\n1\t2\n2\t3\n").unwrap();
    fs::write(ds.join("features.csv"), "1,0\nNaN,1\n0,1\n1,1\n").unwrap();
    fs::write(ds.join("labels.csv"), "0\n0\n1\n1\n").unwrap();

    let config = root.join("run.toml");
    fs::write(
        &config,
        format!(
            "experiment = \"default-hp\"\n\
             datasets = [{:?}]\n\
             seeds = [42]\n\
             models = [\"dmon\"]\n\
             selection_metrics = [\"modularity\"]\n\
             max_epochs = 10\n\
             patience = 5\n\
             hidden_dims = [4]\n\
             workers = 1\n\
             output_dir = {:?}\n",
            ds.display(),
            root.join("results").display()
        ),
    )
    .unwrap();
    let out = run(&["run", "--config", config.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(1), "failed run must exit 1");
    let grid_dir = fs::read_dir(root.join("results"))
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let csv = fs::read_to_string(grid_dir.join("aggregate.csv")).unwrap();
    // failed runs stay in the table with worst-case metrics
    assert!(csv.lines().count() == 2, "{csv}");
    assert!(csv.contains("-1.000000"), "{csv}");
    let _ = fs::remove_dir_all(&root);
}

#[test]
fn ugs_seed_env_overrides_seed_list() {
    let root = temp_root("envseed");
    let config = root.join("run.toml");
    write_config(&config, &root.join("results"), "");
    let out = run(
        &["run", "--config", config.to_str().unwrap()],
        &[("UGS_SEED", "7")],
    );
    assert!(out.status.success());
    let grid_dir = fs::read_dir(root.join("results"))
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let csv = fs::read_to_string(grid_dir.join("aggregate.csv")).unwrap();
    let seeds: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert!(!seeds.is_empty());
    assert!(seeds.iter().all(|&s| s == "7"), "{seeds:?}");
    let _ = fs::remove_dir_all(&root);
}

#[test]
fn hpo_honors_max_trials_and_fcr_appears_with_two_dirs() {
    let root = temp_root("hpo");
    // dataset
    let out = run(
        &[
            "generate",
            "--adj",
            "distinct",
            "--feat",
            "distinct",
            "--n",
            "24",
            "--d",
            "8",
            "--seed",
            "42",
            "--out",
            root.join("ds").to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success());
    let ds = root.join("ds").join("synth-adistinct-xdistinct");

    let write_cfg = |name: &str, experiment: &str, extra: &str| -> PathBuf {
        let path = root.join(name);
        fs::write(
            &path,
            format!(
                "experiment = {experiment:?}\n\
                 datasets = [{:?}]\n\
                 seeds = [42, 24]\n\
                 models = [\"dmon\"]\n\
                 selection_metrics = [\"modularity\"]\n\
                 max_epochs = 15\n\
                 patience = 10\n\
                 hidden_dims = [4]\n\
                 eval_interval = 5\n\
                 workers = 2\n\
                 output_dir = {:?}\n\
                 {extra}",
                ds.display(),
                root.join("results").display()
            ),
        )
        .unwrap();
        path
    };

    let default_cfg = write_cfg("default.toml", "default-hp", "");
    let hpo_cfg = write_cfg("hpo.toml", "hpo", "max_trials = 3\n");

    let out = run(&["run", "--config", default_cfg.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["run", "--config", hpo_cfg.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let mut grids: Vec<PathBuf> = fs::read_dir(root.join("results"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    grids.sort();
    assert_eq!(grids.len(), 2);

    // trial log: 2 seeds × 3 trials + header
    let hpo_grid = grids
        .iter()
        .find(|g| g.join("trials.csv").is_file())
        .expect("hpo grid has trials.csv");
    let trials = fs::read_to_string(hpo_grid.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 3, "{trials}");

    let report = root.join("report");
    let out = run(
        &[
            "analyze",
            grids[0].to_str().unwrap(),
            grids[1].to_str().unwrap(),
            "--out",
            report.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fcr = fs::read_to_string(report.join("tables").join("fcr.csv")).unwrap();
    assert_eq!(fcr.lines().count(), 3, "{fcr}");
    let _ = fs::remove_dir_all(&root);
}

#[test]
fn reduced_data_experiment_produces_fraction_tables() {
    let root = temp_root("reduced");
    let out = run(
        &[
            "generate",
            "--adj",
            "distinct",
            "--feat",
            "distinct",
            "--n",
            "30",
            "--d",
            "10",
            "--seed",
            "42",
            "--out",
            root.join("ds").to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success());
    let ds = root.join("ds").join("synth-adistinct-xdistinct");
    assert!(ds.is_dir(), "single combo writes one directory");

    let config = root.join("run.toml");
    fs::write(
        &config,
        format!(
            "experiment = \"reduced-data\"\n\
             datasets = [{:?}]\n\
             seeds = [42, 24, 976]\n\
             models = [\"dmon\"]\n\
             selection_metrics = [\"modularity\"]\n\
             max_epochs = 20\n\
             patience = 10\n\
             hidden_dims = [4]\n\
             eval_interval = 5\n\
             workers = 2\n\
             output_dir = {:?}\n",
            ds.display(),
            root.join("results").display()
        ),
    )
    .unwrap();
    let out = run(&["run", "--config", config.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let grid_dir = fs::read_dir(root.join("results"))
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let csv = fs::read_to_string(grid_dir.join("aggregate.csv")).unwrap();
    // 1 model × 3 seeds × 1 metric × default fractions {0.33, 0.66}
    assert_eq!(csv.lines().count(), 1 + 6, "{csv}");
    assert!(csv.contains(",0.33,"));
    assert!(csv.contains(",0.66,"));

    let report = root.join("report");
    let out = run(
        &[
            "analyze",
            grid_dir.to_str().unwrap(),
            "--out",
            report.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success());
    let tables: Vec<String> = fs::read_dir(report.join("tables"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(
        tables.iter().any(|t| t.starts_with("reduced_0.33")),
        "{tables:?}"
    );
    assert!(
        tables.iter().any(|t| t.starts_with("reduced_0.66")),
        "{tables:?}"
    );
    let _ = fs::remove_dir_all(&root);
}

#[test]
fn help_lists_flag_defaults() {
    let out = run(&["run", "--help"], &[]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("250"), "max-trials default missing: {text}");
    assert!(text.contains("5000"), "max-epochs default missing: {text}");
    assert!(
        text.contains("42,24,976,12345,98765,7,856,90,672,785"),
        "seed list missing: {text}"
    );
}

#[test]
fn analyze_rejects_schema_mismatch() {
    let root = temp_root("schema");
    let fake = root.join("results");
    fs::create_dir_all(fake.join("runs")).unwrap();
    fs::write(
        fake.join("manifest.json"),
        "{\"schema_version\":\"ugs-results-v0\",\"experiment\":\"default-hp\",\"config_hash\":\"deadbeef00000000\",\"n_runs\":0}",
    )
    .unwrap();
    let out = run(
        &[
            "analyze",
            fake.to_str().unwrap(),
            "--out",
            root.join("report").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("schema"), "{err}");
    let _ = fs::remove_dir_all(&root);
}
