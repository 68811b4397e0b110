//! Partition-quality metrics.
//!
//! Unsupervised: modularity (maximize) and mean per-cluster conductance
//! (minimize). Supervised: NMI with arithmetic-mean normalization and
//! Hungarian-matched macro-F1. Plus the two graph statistics used to
//! validate datasets (average clustering coefficient, mean closeness
//! centrality).
//!
//! All logs are natural. All operations are pure functions.

use crate::graph::{Graph, Partition};
use crate::linalg::Mat;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("metric undefined on an empty edge set")]
    EmptyEdgeSet,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("hungarian_match requires a square matrix, got {0}x{1}")]
    NonSquare(usize, usize),
}

/// Which way a metric improves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

/// The four metrics the framework reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Modularity,
    Conductance,
    Nmi,
    F1,
}

impl MetricKind {
    pub fn direction(self) -> Direction {
        match self {
            MetricKind::Conductance => Direction::Minimize,
            _ => Direction::Maximize,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Modularity => "modularity",
            MetricKind::Conductance => "conductance",
            MetricKind::Nmi => "nmi",
            MetricKind::F1 => "f1",
        }
    }

    /// `true` if `a` is strictly better than `b` for this metric.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self.direction() {
            Direction::Maximize => a > b,
            Direction::Minimize => a < b,
        }
    }

    pub fn worst(self) -> f64 {
        match self {
            MetricKind::Modularity => -1.0,
            MetricKind::Conductance => 1.0,
            MetricKind::Nmi | MetricKind::F1 => 0.0,
        }
    }
}

/// A named metric observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue {
    pub kind: MetricKind,
    pub value: f64,
}

impl MetricValue {
    pub fn new(kind: MetricKind, value: f64) -> Self {
        MetricValue { kind, value }
    }

    /// Range check from the metric definitions.
    pub fn in_range(&self) -> bool {
        match self.kind {
            MetricKind::Modularity => (-1.0..=1.0).contains(&self.value),
            _ => (0.0..=1.0).contains(&self.value),
        }
    }
}

/// Newman modularity: `Q = (1/2m)·Σ_ij [A_ij − d_i d_j / 2m]·δ(c_i, c_j)`.
///
/// Invariant under cluster relabeling; exactly 0 for the single-cluster
/// partition. Errors on an empty edge set, where `Q` is undefined.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64, MetricError> {
    if g.n_edges() == 0 {
        return Err(MetricError::EmptyEdgeSet);
    }
    if p.len() != g.n_nodes() {
        return Err(MetricError::LengthMismatch(p.len(), g.n_nodes()));
    }
    let m = g.n_edges() as f64;
    let assignment = p.assignment();
    let mut internal = vec![0.0f64; p.k()];
    let mut volume = vec![0.0f64; p.k()];
    for &(u, v) in g.edges() {
        if assignment[u] == assignment[v] {
            internal[assignment[u]] += 1.0;
        }
    }
    for (node, &c) in assignment.iter().enumerate() {
        volume[c] += g.neighbors(node).len() as f64;
    }
    let mut q = 0.0;
    for c in 0..p.k() {
        q += internal[c] / m - (volume[c] / (2.0 * m)).powi(2);
    }
    Ok(q)
}

/// Mean per-cluster conductance `φ(S) = cut(S) / vol(S)`, averaged over all
/// `k` clusters. Empty or zero-volume clusters score the worst value 1.
/// Lower is better; result is in `[0, 1]`.
pub fn conductance(g: &Graph, p: &Partition) -> Result<f64, MetricError> {
    if g.n_edges() == 0 {
        return Err(MetricError::EmptyEdgeSet);
    }
    if p.len() != g.n_nodes() {
        return Err(MetricError::LengthMismatch(p.len(), g.n_nodes()));
    }
    let assignment = p.assignment();
    let mut cut = vec![0.0f64; p.k()];
    let mut volume = vec![0.0f64; p.k()];
    for &(u, v) in g.edges() {
        if assignment[u] != assignment[v] {
            cut[assignment[u]] += 1.0;
            cut[assignment[v]] += 1.0;
        }
    }
    for (node, &c) in assignment.iter().enumerate() {
        volume[c] += g.neighbors(node).len() as f64;
    }
    let mut total = 0.0;
    for c in 0..p.k() {
        total += if volume[c] > 0.0 { cut[c] / volume[c] } else { 1.0 };
    }
    Ok(total / p.k() as f64)
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information, `2·I(P;L) / (H(P) + H(L))`, natural log.
///
/// Defined as 1 when both sides are constant (identical up to relabeling)
/// and 0 when exactly one entropy vanishes. Symmetric in its arguments.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(1.0);
    }
    let n = a.len() as f64;
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut counts_a = vec![0usize; ka];
    let mut counts_b = vec![0usize; kb];
    let mut joint = vec![0usize; ka * kb];
    for (&x, &y) in a.iter().zip(b) {
        counts_a[x] += 1;
        counts_b[y] += 1;
        joint[x * kb + y] += 1;
    }
    let h_a = entropy(&counts_a, n);
    let h_b = entropy(&counts_b, n);
    if h_a == 0.0 && h_b == 0.0 {
        return Ok(1.0);
    }
    if h_a == 0.0 || h_b == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for x in 0..ka {
        for y in 0..kb {
            let c = joint[x * kb + y];
            if c > 0 {
                let p_xy = c as f64 / n;
                let p_x = counts_a[x] as f64 / n;
                let p_y = counts_b[y] as f64 / n;
                mi += p_xy * (p_xy / (p_x * p_y)).ln();
            }
        }
    }
    Ok(2.0 * mi / (h_a + h_b))
}

/// Maximum-weight one-to-one assignment on a square non-negative matrix.
/// Returns `assign[row] = col`.
pub fn hungarian_match(weights: &Mat) -> Result<Vec<usize>, MetricError> {
    if weights.rows != weights.cols {
        return Err(MetricError::NonSquare(weights.rows, weights.cols));
    }
    let n = weights.rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    // Minimize (max - w); potentials method, O(n^3).
    let top = weights.data.iter().cloned().fold(0.0f64, f64::max);
    let cost = |i: usize, j: usize| top - weights.at(i, j);

    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched = vec![0usize; n + 1]; // matched[col] = row (1-based; 0 = free)
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if matched[j] > 0 {
            assign[matched[j] - 1] = j - 1;
        }
    }
    Ok(assign)
}

/// Hungarian-matched macro-F1 with an explicit class universe.
///
/// The clusters×classes contingency matrix is zero-padded to square, matched
/// one-to-one by maximum overlap, and F1 is macro-averaged over the
/// `n_classes` real classes. Classes left unmatched, or with zero support
/// and zero predictions, contribute 0.
///
/// Equal-overlap matchings are broken toward the higher macro-F1. Macro-F1
/// is itself assignment-separable (class `l` matched to cluster `c`
/// contributes `2·m_cl/(|c|+|l|)`), so one Hungarian pass on
/// lexicographically combined weights settles both objectives; without the
/// canonical tie-break the metric would not be invariant under cluster
/// relabeling.
pub fn macro_f1_with_classes(
    pred: &[usize],
    truth: &[usize],
    n_classes: usize,
) -> Result<f64, MetricError> {
    if pred.len() != truth.len() {
        return Err(MetricError::LengthMismatch(pred.len(), truth.len()));
    }
    if n_classes == 0 {
        return Ok(0.0);
    }
    let k = pred.iter().map(|&c| c + 1).max().unwrap_or(1);
    let side = k.max(n_classes);
    let mut contingency = Mat::zeros(side, side);
    for (&c, &l) in pred.iter().zip(truth) {
        *contingency.at_mut(c, l) += 1.0;
    }
    let mut cluster_sizes = vec![0.0f64; side];
    let mut class_supports = vec![0.0f64; side];
    for (&c, &l) in pred.iter().zip(truth) {
        cluster_sizes[c] += 1.0;
        class_supports[l] += 1.0;
    }
    // overlap dominates; the fractional F1 share (< 1 per pair, < side in
    // total) only separates equal-overlap matchings
    let scale = (side + 1) as f64;
    let mut combined = Mat::zeros(side, side);
    for c in 0..side {
        for l in 0..side {
            let m = contingency.at(c, l);
            let f1_share = if l < n_classes && cluster_sizes[c] + class_supports[l] > 0.0 {
                2.0 * m / (cluster_sizes[c] + class_supports[l])
            } else {
                0.0
            };
            *combined.at_mut(c, l) = scale * m + f1_share;
        }
    }
    let cluster_to_class = hungarian_match(&combined)?;

    // Per-class true positives / predicted counts after mapping.
    let mut tp = vec![0.0f64; n_classes];
    let mut predicted = vec![0.0f64; n_classes];
    let mut support = vec![0.0f64; n_classes];
    for (&c, &l) in pred.iter().zip(truth) {
        support[l] += 1.0;
        let mapped = cluster_to_class[c];
        if mapped < n_classes {
            predicted[mapped] += 1.0;
            if mapped == l {
                tp[mapped] += 1.0;
            }
        }
    }
    let mut total = 0.0;
    for class in 0..n_classes {
        let denom = predicted[class] + support[class];
        if denom > 0.0 {
            total += 2.0 * tp[class] / denom;
        }
        // zero support and zero predictions: contributes 0
    }
    Ok(total / n_classes as f64)
}

/// Macro-F1 with the class universe inferred from the label vector.
pub fn macro_f1(p: &Partition, labels: &[usize]) -> Result<f64, MetricError> {
    let n_classes = labels.iter().map(|&l| l + 1).max().unwrap_or(0);
    macro_f1_with_classes(p.assignment(), labels, n_classes)
}

/// Average clustering coefficient and mean closeness centrality.
///
/// Clustering of a node with degree < 2 is 0. Closeness uses the
/// reachable-component scaling `((r−1)/(n−1)) · ((r−1)/Σd)` so that
/// disconnected graphs are well defined; isolated nodes score 0.
pub fn graph_stats(g: &Graph) -> (f64, f64) {
    let n = g.n_nodes();
    if n == 0 {
        return (0.0, 0.0);
    }

    let mut clustering_sum = 0.0;
    for node in 0..n {
        let nbrs = g.neighbors(node);
        let d = nbrs.len();
        if d < 2 {
            continue;
        }
        let mut links = 0usize;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if g.has_edge(a, b) {
                    links += 1;
                }
            }
        }
        clustering_sum += 2.0 * links as f64 / (d as f64 * (d as f64 - 1.0));
    }

    let mut closeness_sum = 0.0;
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for source in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[source] = 0;
        queue.clear();
        queue.push_back(source);
        let mut reached = 0usize;
        let mut total_dist = 0usize;
        while let Some(u) = queue.pop_front() {
            reached += 1;
            total_dist += dist[u];
            for &w in g.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if reached > 1 && n > 1 {
            let r = (reached - 1) as f64;
            closeness_sum += (r / (n - 1) as f64) * (r / total_dist as f64);
        }
    }

    (clustering_sum / n as f64, closeness_sum / n as f64)
}
