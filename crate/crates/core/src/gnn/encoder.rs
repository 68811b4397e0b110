//! Graph-convolution encoder with hand-derived gradients.
//!
//! Each layer computes `H' = relu(Â·H·W)` against the cached symmetrically
//! normalized adjacency `Â`. The backward pass is exact; correctness is
//! enforced by the finite-difference suite.

use crate::graph::Graph;
use crate::linalg::{Csr, Mat};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::GnnError;

/// GCN encoder bound to one graph (the normalized adjacency is cached).
#[derive(Debug, Clone)]
pub struct GcnEncoder {
    pub weights: Vec<Mat>,
    adj: Csr,
    in_dim: usize,
}

/// Per-layer activations retained by the forward pass for backprop.
pub struct EncoderTrace {
    /// `H_0 .. H_L`; `H_0` is the input, `H_L` the embeddings.
    pub activations: Vec<Mat>,
    /// Pre-activation `M_l = Â·(H_l·W_l)` per layer.
    pub preacts: Vec<Mat>,
}

impl EncoderTrace {
    pub fn embeddings(&self) -> &Mat {
        self.activations.last().expect("non-empty trace")
    }
}

fn glorot_uniform(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let mut m = Mat::zeros(rows, cols);
    for v in &mut m.data {
        *v = rng.random_range(-bound..bound);
    }
    m
}

impl GcnEncoder {
    /// Glorot-uniform initialized encoder; `dims` chains input → hidden
    /// layers, e.g. `[1433, 64]` for one layer.
    pub fn new(g: &Graph, dims: &[usize], rng: &mut ChaCha8Rng) -> Result<Self, GnnError> {
        if dims.len() < 2 {
            return Err(GnnError::BadArchitecture(
                "encoder needs at least input and output dims".into(),
            ));
        }
        if dims[0] != g.n_features() {
            return Err(GnnError::DimensionMismatch {
                expected: g.n_features(),
                got: dims[0],
            });
        }
        let weights = dims
            .windows(2)
            .map(|w| glorot_uniform(w[0], w[1], rng))
            .collect();
        Ok(GcnEncoder {
            weights,
            adj: g.normalized_adjacency_csr(),
            in_dim: dims[0],
        })
    }

    /// Encoder with explicit weights; used by tests and checkpoint loading.
    pub fn with_weights(g: &Graph, weights: Vec<Mat>) -> Result<Self, GnnError> {
        if weights.is_empty() {
            return Err(GnnError::BadArchitecture("no layers".into()));
        }
        if weights[0].rows != g.n_features() {
            return Err(GnnError::DimensionMismatch {
                expected: g.n_features(),
                got: weights[0].rows,
            });
        }
        let in_dim = weights[0].rows;
        Ok(GcnEncoder {
            weights,
            adj: g.normalized_adjacency_csr(),
            in_dim,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.adj.n
    }

    pub fn out_dim(&self) -> usize {
        self.weights.last().expect("non-empty").cols
    }

    /// Forward pass retaining per-layer activations.
    pub fn forward(&self, input: &Mat) -> Result<EncoderTrace, GnnError> {
        if input.rows != self.adj.n || input.cols != self.in_dim {
            return Err(GnnError::DimensionMismatch {
                expected: self.in_dim,
                got: input.cols,
            });
        }
        let mut activations = vec![input.clone()];
        let mut preacts = Vec::with_capacity(self.weights.len());
        for w in &self.weights {
            let projected = activations.last().unwrap().matmul(w);
            let pre = self.adj.matmul(&projected);
            let mut post = pre.clone();
            for v in &mut post.data {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            preacts.push(pre);
            activations.push(post);
        }
        Ok(EncoderTrace {
            activations,
            preacts,
        })
    }

    /// Accumulates weight gradients for `d_embeddings` flowing into the last
    /// activation of `trace`. Gradients add into `grads` (one Mat per layer).
    pub fn backward_accumulate(&self, trace: &EncoderTrace, d_embeddings: &Mat, grads: &mut [Mat]) {
        assert_eq!(grads.len(), self.weights.len());
        let mut upstream = d_embeddings.clone();
        for l in (0..self.weights.len()).rev() {
            // dM = upstream ⊙ relu'(M)
            let mut d_pre = upstream;
            for (v, &m) in d_pre.data.iter_mut().zip(&trace.preacts[l].data) {
                if m <= 0.0 {
                    *v = 0.0;
                }
            }
            // M = Â·(H·W) with Â symmetric, so dT = Â·dM
            let d_proj = self.adj.matmul(&d_pre);
            grads[l].add_assign(&trace.activations[l].transpose_matmul(&d_proj));
            if l > 0 {
                upstream = d_proj.matmul_transpose(&self.weights[l]);
            } else {
                break;
            }
        }
    }

    pub fn zero_grads(&self) -> Vec<Mat> {
        self.weights
            .iter()
            .map(|w| Mat::zeros(w.rows, w.cols))
            .collect()
    }
}

/// Embeddings of a graph under the encoder; deterministic.
pub fn gcn_forward(enc: &GcnEncoder, g: &Graph) -> Result<Mat, GnnError> {
    let mut trace = enc.forward(g.features())?;
    Ok(trace.activations.pop().expect("non-empty"))
}
