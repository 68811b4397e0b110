//! Attributed-graph data model: validation, degrees, normalization and
//! edge subsampling.
//!
//! Graphs are undirected and unweighted. Edges are stored once as unordered
//! pairs `(u, v)` with `u < v`; the adjacency is symmetrized on demand.

use crate::linalg::{Csr, Mat};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge endpoint {endpoint} out of range for {n_nodes} nodes")]
    EndpointOutOfRange { endpoint: usize, n_nodes: usize },
    #[error("feature matrix is {got_rows}x{got_cols}, expected {n_nodes}x{n_features}")]
    FeatureShape {
        got_rows: usize,
        got_cols: usize,
        n_nodes: usize,
        n_features: usize,
    },
    #[error("labels length {got} does not match {n_nodes} nodes")]
    LabelLength { got: usize, n_nodes: usize },
    #[error("label id {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("labels present but class count missing")]
    MissingClassCount,
    #[error("subsample fraction {0} outside (0, 1]")]
    FractionOutOfRange(f64),
    #[error("partition assignment {value} out of range for {k} clusters")]
    AssignmentOutOfRange { value: usize, k: usize },
    #[error("partition length {got} does not match {n_nodes} nodes")]
    PartitionLength { got: usize, n_nodes: usize },
}

/// Undirected attributed graph with optional ground-truth labels.
///
/// Immutable after construction; cheap to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n_nodes: usize,
    /// Unordered pairs, canonical `u < v`, sorted lexicographically.
    edges: Vec<(usize, usize)>,
    features: Mat,
    labels: Option<Vec<usize>>,
    n_classes: Option<usize>,
    /// Sorted neighbor lists, symmetric.
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Validates and builds a graph. Edges may arrive in any orientation or
    /// order; they are canonicalized. Self-loops and duplicates are rejected.
    pub fn new(
        n_nodes: usize,
        edges: Vec<(usize, usize)>,
        features: Mat,
        labels: Option<Vec<usize>>,
        n_classes: Option<usize>,
    ) -> Result<Self, GraphError> {
        if features.rows != n_nodes {
            return Err(GraphError::FeatureShape {
                got_rows: features.rows,
                got_cols: features.cols,
                n_nodes,
                n_features: features.cols,
            });
        }
        let mut canon = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if u >= n_nodes || v >= n_nodes {
                return Err(GraphError::EndpointOutOfRange {
                    endpoint: u.max(v),
                    n_nodes,
                });
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        for w in canon.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
            }
        }
        if let Some(ref l) = labels {
            if l.len() != n_nodes {
                return Err(GraphError::LabelLength {
                    got: l.len(),
                    n_nodes,
                });
            }
            let k = n_classes.ok_or(GraphError::MissingClassCount)?;
            for &id in l {
                if id >= k {
                    return Err(GraphError::LabelOutOfRange {
                        label: id,
                        n_classes: k,
                    });
                }
            }
        }
        let mut neighbors = vec![Vec::new(); n_nodes];
        for &(u, v) in &canon {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Graph {
            n_nodes,
            edges: canon,
            features,
            labels,
            n_classes,
            neighbors,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn features(&self) -> &Mat {
        &self.features
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn n_classes(&self) -> Option<usize> {
        self.n_classes
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    /// Degree of every node; sums to twice the edge count.
    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(|n| n.len()).collect()
    }

    /// Symmetrically normalized adjacency with self-loops,
    /// `D̃^{-1/2} (A + I) D̃^{-1/2}` where `D̃` is the degree matrix of `A + I`.
    pub fn normalized_adjacency(&self) -> Mat {
        self.normalized_adjacency_csr().to_dense()
    }

    /// Sparse form of [`Graph::normalized_adjacency`].
    pub fn normalized_adjacency_csr(&self) -> Csr {
        let inv_sqrt: Vec<f64> = self
            .neighbors
            .iter()
            .map(|n| 1.0 / ((n.len() + 1) as f64).sqrt())
            .collect();
        let rows: Vec<Vec<(usize, f64)>> = (0..self.n_nodes)
            .map(|i| {
                let mut row = Vec::with_capacity(self.neighbors[i].len() + 1);
                let mut inserted_self = false;
                for &j in &self.neighbors[i] {
                    if !inserted_self && j > i {
                        row.push((i, inv_sqrt[i] * inv_sqrt[i]));
                        inserted_self = true;
                    }
                    row.push((j, inv_sqrt[i] * inv_sqrt[j]));
                }
                if !inserted_self {
                    row.push((i, inv_sqrt[i] * inv_sqrt[i]));
                }
                row
            })
            .collect();
        Csr::from_rows(self.n_nodes, rows)
    }

    /// Keeps `⌈fraction·|E|⌉` edges drawn uniformly without replacement.
    /// Features and labels are unchanged; isolated nodes may result.
    pub fn subsample_edges(
        &self,
        fraction: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Graph, GraphError> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(GraphError::FractionOutOfRange(fraction));
        }
        let keep = (fraction * self.edges.len() as f64).ceil() as usize;
        let mut pool: Vec<(usize, usize)> = self.edges.clone();
        // Partial Fisher-Yates: the first `keep` slots end up a uniform sample.
        for i in 0..keep.min(pool.len().saturating_sub(1)) {
            let j = rng.random_range(i..pool.len());
            pool.swap(i, j);
        }
        pool.truncate(keep);
        Graph::new(
            self.n_nodes,
            pool,
            self.features.clone(),
            self.labels.clone(),
            self.n_classes,
        )
    }

    /// Drops labels; used by the supervision-leak audit.
    pub fn without_labels(&self) -> Graph {
        let mut g = self.clone();
        g.labels = None;
        g.n_classes = None;
        g
    }
}

/// Hard cluster assignment: one cluster id per node, ids in `[0, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, k: usize) -> Result<Self, GraphError> {
        for &c in &assignment {
            if c >= k {
                return Err(GraphError::AssignmentOutOfRange { value: c, k });
            }
        }
        Ok(Partition { assignment, k })
    }

    /// Validates the assignment length against a graph.
    pub fn for_graph(assignment: Vec<usize>, k: usize, g: &Graph) -> Result<Self, GraphError> {
        if assignment.len() != g.n_nodes() {
            return Err(GraphError::PartitionLength {
                got: assignment.len(),
                n_nodes: g.n_nodes(),
            });
        }
        Partition::new(assignment, k)
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Number of nodes in each cluster.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }
}
