//! Dataset directory IO.
//!
//! Layout (UTF-8 text):
//! - `meta.json`: `{"name", "n_nodes", "n_features", "n_classes", "edge_convention"}`
//! - `edges.tsv`: one `u<TAB>v` per line, 0-indexed
//! - `features.csv`: `n_nodes` rows of `n_features` comma-separated reals
//! - `labels.csv`: one integer per line; absent for unlabeled data
//!
//! `edge_convention` declares how `edges.tsv` counts edges: `unordered` lists
//! each pair once, `directed_double` lists both orientations. The loader
//! validates against the declared convention and normalizes to unordered.

use crate::graph::{Graph, GraphError};
use crate::linalg::Mat;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing file {0}")]
    MissingFile(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed meta.json: {0}")]
    MalformedMeta(String),
    #[error("{file}:{line}: malformed line: {reason}")]
    MalformedLine {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("{file}: expected {expected} rows, found {found}")]
    RowCountMismatch {
        file: String,
        expected: usize,
        found: usize,
    },
    #[error("edges.tsv declared directed_double but edge ({0}, {1}) lacks its reverse")]
    MissingReverseEdge(usize, usize),
    #[error("edges.tsv declared directed_double but has an odd number of lines")]
    OddDirectedCount,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeConvention {
    /// Each unordered pair appears once.
    Unordered,
    /// Each unordered pair appears in both orientations.
    DirectedDouble,
}

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    name: String,
    n_nodes: usize,
    n_features: usize,
    n_classes: usize,
    edge_convention: EdgeConvention,
}

fn read_to_string(dir: &Path, file: &str) -> Result<String, DatasetError> {
    let path = dir.join(file);
    if !path.is_file() {
        return Err(DatasetError::MissingFile(path.display().to_string()));
    }
    fs::read_to_string(&path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads and validates a dataset directory.
pub fn load_dataset(dir: &Path) -> Result<Graph, DatasetError> {
    Ok(load_named_dataset(dir)?.1)
}

/// Like [`load_dataset`], also returning the declared dataset name.
pub fn load_named_dataset(dir: &Path) -> Result<(String, Graph), DatasetError> {
    let meta: Meta = serde_json::from_str(&read_to_string(dir, "meta.json")?)
        .map_err(|e| DatasetError::MalformedMeta(e.to_string()))?;

    let edge_text = read_to_string(dir, "edges.tsv")?;
    let mut directed_pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut line_count = 0usize;
    for (lineno, line) in edge_text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        line_count += 1;
        let mut it = line.split('\t');
        let parse = |tok: Option<&str>| -> Result<usize, DatasetError> {
            tok.ok_or(())
                .and_then(|t| t.trim().parse::<usize>().map_err(|_| ()))
                .map_err(|_| DatasetError::MalformedLine {
                    file: "edges.tsv".into(),
                    line: lineno + 1,
                    reason: format!("expected \"u<TAB>v\", got {line:?}"),
                })
        };
        let u = parse(it.next())?;
        let v = parse(it.next())?;
        if it.next().is_some() {
            return Err(DatasetError::MalformedLine {
                file: "edges.tsv".into(),
                line: lineno + 1,
                reason: "more than two fields".into(),
            });
        }
        directed_pairs.insert((u, v));
    }

    let edges: Vec<(usize, usize)> = match meta.edge_convention {
        EdgeConvention::Unordered => directed_pairs.iter().copied().collect(),
        EdgeConvention::DirectedDouble => {
            if !line_count.is_multiple_of(2) {
                return Err(DatasetError::OddDirectedCount);
            }
            for &(u, v) in &directed_pairs {
                if !directed_pairs.contains(&(v, u)) {
                    return Err(DatasetError::MissingReverseEdge(u, v));
                }
            }
            directed_pairs
                .iter()
                .copied()
                .filter(|&(u, v)| u < v)
                .collect()
        }
    };

    let feature_text = read_to_string(dir, "features.csv")?;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(meta.n_nodes);
    for (lineno, line) in feature_text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(meta.n_features);
        for tok in line.split(',') {
            let v = tok.trim().parse::<f64>().map_err(|_| DatasetError::MalformedLine {
                file: "features.csv".into(),
                line: lineno + 1,
                reason: format!("bad real value {tok:?}"),
            })?;
            row.push(v);
        }
        if row.len() != meta.n_features {
            return Err(DatasetError::MalformedLine {
                file: "features.csv".into(),
                line: lineno + 1,
                reason: format!("expected {} columns, found {}", meta.n_features, row.len()),
            });
        }
        rows.push(row);
    }
    if rows.len() != meta.n_nodes {
        return Err(DatasetError::RowCountMismatch {
            file: "features.csv".into(),
            expected: meta.n_nodes,
            found: rows.len(),
        });
    }
    let features = Mat::from_rows(rows);

    let labels_path = dir.join("labels.csv");
    let labels = if labels_path.is_file() {
        let text = read_to_string(dir, "labels.csv")?;
        let mut ids = Vec::with_capacity(meta.n_nodes);
        for (lineno, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let id = line.trim().parse::<usize>().map_err(|_| DatasetError::MalformedLine {
                file: "labels.csv".into(),
                line: lineno + 1,
                reason: format!("bad class id {line:?}"),
            })?;
            ids.push(id);
        }
        if ids.len() != meta.n_nodes {
            return Err(DatasetError::RowCountMismatch {
                file: "labels.csv".into(),
                expected: meta.n_nodes,
                found: ids.len(),
            });
        }
        Some(ids)
    } else {
        None
    };

    let n_classes = if labels.is_some() {
        Some(meta.n_classes)
    } else {
        None
    };
    let graph = Graph::new(meta.n_nodes, edges, features, labels, n_classes)?;
    Ok((meta.name, graph))
}

/// Formats a real so that it parses back bit-identically.
fn fmt_real(v: f64) -> String {
    let mut s = String::new();
    write!(s, "{v}").unwrap();
    s
}

/// Writes a graph as a dataset directory. Inverse of [`load_dataset`].
pub fn save_dataset(
    g: &Graph,
    name: &str,
    convention: EdgeConvention,
    dir: &Path,
) -> Result<(), DatasetError> {
    fs::create_dir_all(dir).map_err(|source| DatasetError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let write = |file: &str, contents: String| -> Result<(), DatasetError> {
        let path = dir.join(file);
        fs::write(&path, contents).map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })
    };

    let meta = Meta {
        name: name.to_string(),
        n_nodes: g.n_nodes(),
        n_features: g.n_features(),
        n_classes: g.n_classes().unwrap_or(0),
        edge_convention: convention,
    };
    let mut meta_json = serde_json::to_string_pretty(&meta).expect("meta serializes");
    meta_json.push('\n');
    write("meta.json", meta_json)?;

    let mut edge_text = String::new();
    for &(u, v) in g.edges() {
        writeln!(edge_text, "{u}\t{v}").unwrap();
        if convention == EdgeConvention::DirectedDouble {
            writeln!(edge_text, "{v}\t{u}").unwrap();
        }
    }
    write("edges.tsv", edge_text)?;

    let mut feat_text = String::new();
    for i in 0..g.n_nodes() {
        let row = g.features().row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                feat_text.push(',');
            }
            feat_text.push_str(&fmt_real(*v));
        }
        feat_text.push('\n');
    }
    write("features.csv", feat_text)?;

    if let Some(labels) = g.labels() {
        let mut label_text = String::new();
        for l in labels {
            writeln!(label_text, "{l}").unwrap();
        }
        write("labels.csv", label_text)?;
    }
    Ok(())
}
