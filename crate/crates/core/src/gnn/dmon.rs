//! Spectral-modularity clustering head.
//!
//! A linear head over the encoder embeddings produces per-node soft cluster
//! assignments `C = softmax(H·W_c)`. The loss is the negated modularity
//! trace `−Tr(CᵀBC)/2m` plus a collapse regularizer
//! `λ·((√k/n)·‖Σ_i C_i·‖ − 1)` that penalizes degenerate all-in-one
//! assignments.

use crate::graph::{Graph, Partition};
use crate::linalg::Mat;
use rand_chacha::ChaCha8Rng;

use super::encoder::GcnEncoder;
use super::GnnError;

/// Soft assignment head: `hidden_dim × k` weights plus the collapse weight λ.
#[derive(Debug, Clone)]
pub struct DmonHead {
    pub weights: Mat,
    pub collapse_weight: f64,
}

#[derive(Debug, Clone)]
pub struct DmonModel {
    pub encoder: GcnEncoder,
    pub head: DmonHead,
}

/// Row-wise softmax; rows sum to 1.
pub fn softmax_rows(z: &Mat) -> Mat {
    let mut out = Mat::zeros(z.rows, z.cols);
    for i in 0..z.rows {
        let row = z.row(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let out_row = out.row_mut(i);
        let mut total = 0.0;
        for (o, &v) in out_row.iter_mut().zip(row) {
            let e = (v - max).exp();
            *o = e;
            total += e;
        }
        for o in out_row.iter_mut() {
            *o /= total;
        }
    }
    out
}

/// The two loss terms for an explicit soft assignment `C`.
///
/// Returns `(trace_term, collapse_term)` where `trace_term = −Tr(CᵀBC)/2m`
/// with `B_ij = A_ij − d_i d_j / 2m`, and the collapse term is unweighted
/// (multiply by λ to get its loss contribution). For one-hot `C` the trace
/// term equals minus the modularity of the hard partition.
pub fn dmon_loss_terms(c: &Mat, g: &Graph) -> Result<(f64, f64), GnnError> {
    if g.n_edges() == 0 {
        return Err(GnnError::EmptyEdgeSet);
    }
    if c.rows != g.n_nodes() {
        return Err(GnnError::DimensionMismatch {
            expected: g.n_nodes(),
            got: c.rows,
        });
    }
    let n = c.rows;
    let k = c.cols;
    let two_m = 2.0 * g.n_edges() as f64;

    // Tr(CᵀAC) = Σ_{(u,v)∈E} 2·C_u·C_v
    let mut edge_term = 0.0;
    for &(u, v) in g.edges() {
        let cu = c.row(u);
        let cv = c.row(v);
        let mut dot = 0.0;
        for j in 0..k {
            dot += cu[j] * cv[j];
        }
        edge_term += 2.0 * dot;
    }

    // Tr(Cᵀ(ddᵀ)C)/2m = ‖dᵀC‖²/2m
    let degrees = g.degrees();
    let mut deg_proj = vec![0.0f64; k];
    for (i, &deg) in degrees.iter().enumerate() {
        let row = c.row(i);
        for j in 0..k {
            deg_proj[j] += deg as f64 * row[j];
        }
    }
    let deg_term: f64 = deg_proj.iter().map(|v| v * v).sum::<f64>() / two_m;

    let trace_term = -(edge_term - deg_term) / two_m;

    // (√k/n)·‖colsum(C)‖ − 1
    let mut col_sums = vec![0.0f64; k];
    for i in 0..n {
        let row = c.row(i);
        for j in 0..k {
            col_sums[j] += row[j];
        }
    }
    let col_norm = col_sums.iter().map(|v| v * v).sum::<f64>().sqrt();
    let collapse_term = (k as f64).sqrt() / n as f64 * col_norm - 1.0;

    Ok((trace_term, collapse_term))
}

/// Full DMON loss for embeddings under a head: trace term + λ·collapse.
pub fn dmon_loss(head: &DmonHead, embeddings: &Mat, g: &Graph) -> Result<f64, GnnError> {
    let c = softmax_rows(&embeddings.matmul(&head.weights));
    let (trace_term, collapse_term) = dmon_loss_terms(&c, g)?;
    Ok(trace_term + head.collapse_weight * collapse_term)
}

impl DmonModel {
    pub fn new(
        g: &Graph,
        dims: &[usize],
        k: usize,
        collapse_weight: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, GnnError> {
        let encoder = GcnEncoder::new(g, dims, rng)?;
        let hidden = encoder.out_dim();
        let bound = (6.0 / (hidden + k) as f64).sqrt();
        let mut weights = Mat::zeros(hidden, k);
        for v in &mut weights.data {
            *v = rand::Rng::random_range(rng, -bound..bound);
        }
        Ok(DmonModel {
            encoder,
            head: DmonHead {
                weights,
                collapse_weight,
            },
        })
    }

    pub fn k(&self) -> usize {
        self.head.weights.cols
    }

    pub fn loss(&self, g: &Graph) -> Result<f64, GnnError> {
        let trace = self.encoder.forward(g.features())?;
        dmon_loss(&self.head, trace.embeddings(), g)
    }

    /// Loss and exact gradients for every weight matrix, encoder layers
    /// first, head last.
    pub fn loss_and_grads(&self, g: &Graph) -> Result<(f64, Vec<Mat>), GnnError> {
        let trace = self.encoder.forward(g.features())?;
        let h = trace.embeddings();
        let z = h.matmul(&self.head.weights);
        let c = softmax_rows(&z);
        let (trace_term, collapse_term) = dmon_loss_terms(&c, g)?;
        let loss = trace_term + self.head.collapse_weight * collapse_term;

        let n = c.rows;
        let k = c.cols;
        let m = g.n_edges() as f64;
        let two_m = 2.0 * m;

        // dL/dC from the trace term: −(1/m)·[Σ_{j∈N(i)} C_j − d_i·(dᵀC)/2m]
        let mut d_c = Mat::zeros(n, k);
        for &(u, v) in g.edges() {
            for j in 0..k {
                d_c.data[u * k + j] -= c.at(v, j) / m;
                d_c.data[v * k + j] -= c.at(u, j) / m;
            }
        }
        let degrees = g.degrees();
        let mut deg_proj = vec![0.0f64; k];
        for (i, &deg) in degrees.iter().enumerate() {
            for j in 0..k {
                deg_proj[j] += deg as f64 * c.at(i, j);
            }
        }
        for (i, &deg) in degrees.iter().enumerate() {
            for j in 0..k {
                d_c.data[i * k + j] += deg as f64 * deg_proj[j] / (m * two_m);
            }
        }

        // dL/dC from the collapse term: λ·(√k/n)·s/‖s‖ broadcast to rows.
        let mut col_sums = vec![0.0f64; k];
        for i in 0..n {
            for j in 0..k {
                col_sums[j] += c.at(i, j);
            }
        }
        let col_norm = col_sums.iter().map(|v| v * v).sum::<f64>().sqrt();
        if col_norm > 0.0 {
            let scale = self.head.collapse_weight * (k as f64).sqrt() / (n as f64 * col_norm);
            for i in 0..n {
                for j in 0..k {
                    d_c.data[i * k + j] += scale * col_sums[j];
                }
            }
        }

        // Softmax backward: dZ_ij = C_ij·(dC_ij − Σ_l dC_il·C_il)
        let mut d_z = Mat::zeros(n, k);
        for i in 0..n {
            let c_row = c.row(i);
            let d_row = d_c.row(i);
            let inner: f64 = c_row.iter().zip(d_row).map(|(a, b)| a * b).sum();
            for j in 0..k {
                d_z.data[i * k + j] = c_row[j] * (d_row[j] - inner);
            }
        }

        let mut grads = self.encoder.zero_grads();
        grads.push(h.transpose_matmul(&d_z));
        let d_h = d_z.matmul_transpose(&self.head.weights);
        let n_layers = grads.len() - 1;
        self.encoder
            .backward_accumulate(&trace, &d_h, &mut grads[..n_layers]);
        Ok((loss, grads))
    }

    /// Hard partition: per-node argmax over soft assignments, ties to the
    /// lowest cluster id.
    pub fn extract_partition(&self, g: &Graph) -> Result<Partition, GnnError> {
        let trace = self.encoder.forward(g.features())?;
        let c = softmax_rows(&trace.embeddings().matmul(&self.head.weights));
        let assignment: Vec<usize> = (0..c.rows)
            .map(|i| {
                let row = c.row(i);
                let mut best = 0usize;
                for (j, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = j;
                    }
                }
                best
            })
            .collect();
        Ok(Partition::new(assignment, self.k()).expect("argmax in range"))
    }
}
