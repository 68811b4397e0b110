//! Synthetic attributed-graph benchmark generator.
//!
//! Crosses an adjacency-space signal with a feature-space signal, each one of
//! {distinct, random, null}, over equally sized planted clusters:
//!
//! - distinct adjacency: every cluster is a complete subgraph, no edges
//!   between clusters; distinct features: disjoint equal feature bands per
//!   cluster set to 1.
//! - random: edges / feature bits drawn independently with probability `p`.
//! - null: complete graph / all-ones features — explicitly no separation.

use crate::graph::{Graph, GraphError};
use crate::linalg::Mat;
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("n_nodes {n_nodes} not divisible by k {k}")]
    UnevenClusters { n_nodes: usize, k: usize },
    #[error("probability {0} outside (0, 1)")]
    BadProbability(f64),
    #[error("k must be at least 1")]
    ZeroClusters,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// How much cluster information a space carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionSignal {
    Distinct,
    Random,
    Null,
}

impl PartitionSignal {
    pub fn name(self) -> &'static str {
        match self {
            PartitionSignal::Distinct => "distinct",
            PartitionSignal::Random => "random",
            PartitionSignal::Null => "null",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "distinct" => Some(PartitionSignal::Distinct),
            "random" => Some(PartitionSignal::Random),
            "null" => Some(PartitionSignal::Null),
            _ => None,
        }
    }

    pub const ALL: [PartitionSignal; 3] = [
        PartitionSignal::Distinct,
        PartitionSignal::Random,
        PartitionSignal::Null,
    ];
}

/// Parameters for one synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_nodes: usize,
    pub n_features: usize,
    pub k: usize,
    pub adj_mode: PartitionSignal,
    pub feat_mode: PartitionSignal,
    pub p_edge_random: f64,
    pub p_feat_random: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(adj_mode: PartitionSignal, feat_mode: PartitionSignal, seed: u64) -> Self {
        SynthSpec {
            n_nodes: 1000,
            n_features: 500,
            k: 2,
            adj_mode,
            feat_mode,
            p_edge_random: 0.5,
            p_feat_random: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.k == 0 {
            return Err(SynthError::ZeroClusters);
        }
        if !self.n_nodes.is_multiple_of(self.k) {
            return Err(SynthError::UnevenClusters {
                n_nodes: self.n_nodes,
                k: self.k,
            });
        }
        for p in [self.p_edge_random, self.p_feat_random] {
            if !(p > 0.0 && p < 1.0) {
                return Err(SynthError::BadProbability(p));
            }
        }
        Ok(())
    }

    /// Canonical dataset name, e.g. `synth-adistinct-xnull`.
    pub fn dataset_name(&self) -> String {
        format!(
            "synth-a{}-x{}",
            self.adj_mode.name(),
            self.feat_mode.name()
        )
    }
}

/// Generates the graph with planted labels. Pure function of its inputs:
/// repeat calls are bit-identical.
pub fn generate(spec: &SynthSpec) -> Result<Graph, SynthError> {
    spec.validate()?;
    let n = spec.n_nodes;
    let d = spec.n_features;
    let k = spec.k;
    let block = n / k;
    let labels: Vec<usize> = (0..n).map(|i| i / block).collect();

    // Independent streams per space so modes do not perturb each other.
    let mut edge_rng = rng::rng_for(spec.seed, 0x45);
    let mut feat_rng = rng::rng_for(spec.seed, 0x58);

    let mut edges: Vec<(usize, usize)> = Vec::new();
    match spec.adj_mode {
        PartitionSignal::Distinct => {
            for b in 0..k {
                let start = b * block;
                for u in start..start + block {
                    for v in u + 1..start + block {
                        edges.push((u, v));
                    }
                }
            }
        }
        PartitionSignal::Random => {
            for u in 0..n {
                for v in u + 1..n {
                    if edge_rng.random::<f64>() < spec.p_edge_random {
                        edges.push((u, v));
                    }
                }
            }
        }
        PartitionSignal::Null => {
            for u in 0..n {
                for v in u + 1..n {
                    edges.push((u, v));
                }
            }
        }
    }

    let mut features = Mat::zeros(n, d);
    match spec.feat_mode {
        PartitionSignal::Distinct => {
            // Disjoint equal bands: cluster b owns columns [b·d/k, (b+1)·d/k).
            let band = d / k;
            for (i, &label) in labels.iter().enumerate() {
                let start = label * band;
                let end = if label == k - 1 { d } else { start + band };
                for j in start..end {
                    *features.at_mut(i, j) = 1.0;
                }
            }
        }
        PartitionSignal::Random => {
            for v in &mut features.data {
                if feat_rng.random::<f64>() < spec.p_feat_random {
                    *v = 1.0;
                }
            }
        }
        PartitionSignal::Null => {
            features.data.fill(1.0);
        }
    }

    Ok(Graph::new(n, edges, features, Some(labels), Some(k))?)
}

/// All nine (adjacency × feature) combinations, in a fixed order.
pub fn grid(base: &SynthSpec) -> Vec<SynthSpec> {
    let mut specs = Vec::with_capacity(9);
    for adj in PartitionSignal::ALL {
        for feat in PartitionSignal::ALL {
            let mut s = base.clone();
            s.adj_mode = adj;
            s.feat_mode = feat;
            specs.push(s);
        }
    }
    specs
}
