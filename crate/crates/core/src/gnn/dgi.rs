//! Contrastive mutual-information objective.
//!
//! Positive pairs score true node embeddings against a graph-level summary
//! (sigmoid of the mean-pooled embeddings) through a bilinear discriminator;
//! negative pairs use embeddings of a corrupted graph built by row-shuffling
//! the features while keeping the adjacency. The loss is binary
//! cross-entropy over both pair sets.

use crate::graph::Graph;
use crate::linalg::Mat;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::encoder::GcnEncoder;
use super::GnnError;

/// Bilinear discriminator weights, square in the embedding dimension.
#[derive(Debug, Clone)]
pub struct DgiObjective {
    pub weights: Mat,
}

#[derive(Debug, Clone)]
pub struct DgiModel {
    pub encoder: GcnEncoder,
    pub objective: DgiObjective,
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^x) without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Uniform permutation of `0..n`.
pub fn draw_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

impl DgiModel {
    pub fn new(g: &Graph, dims: &[usize], rng: &mut ChaCha8Rng) -> Result<Self, GnnError> {
        let encoder = GcnEncoder::new(g, dims, rng)?;
        let hidden = encoder.out_dim();
        let bound = (6.0 / (2 * hidden) as f64).sqrt();
        let mut weights = Mat::zeros(hidden, hidden);
        for v in &mut weights.data {
            *v = rand::Rng::random_range(rng, -bound..bound);
        }
        Ok(DgiModel {
            encoder,
            objective: DgiObjective { weights },
        })
    }

    /// Loss with the corruption permutation drawn from `rng`.
    pub fn loss(&self, g: &Graph, rng: &mut ChaCha8Rng) -> Result<f64, GnnError> {
        let perm = draw_permutation(g.n_nodes(), rng);
        self.loss_with_perm(g, &perm)
    }

    pub fn loss_with_perm(&self, g: &Graph, perm: &[usize]) -> Result<f64, GnnError> {
        let (loss, _, _) = self.forward_scores(g, perm)?;
        Ok(loss)
    }

    /// Returns (loss, positive logits, negative logits).
    pub fn forward_scores(
        &self,
        g: &Graph,
        perm: &[usize],
    ) -> Result<(f64, Vec<f64>, Vec<f64>), GnnError> {
        let n = g.n_nodes();
        let clean = self.encoder.forward(g.features())?;
        let corrupt = self.encoder.forward(&g.features().permute_rows(perm))?;
        let h = clean.embeddings();
        let h_neg = corrupt.embeddings();
        let hidden = h.cols;

        let mut pooled = vec![0.0f64; hidden];
        for i in 0..n {
            for (acc, &v) in pooled.iter_mut().zip(h.row(i)) {
                *acc += v;
            }
        }
        let summary: Vec<f64> = pooled.iter().map(|&v| sigmoid(v / n as f64)).collect();

        // w_s = W·s, shared by every pair
        let mut w_s = vec![0.0f64; hidden];
        for r in 0..hidden {
            let row = self.objective.weights.row(r);
            let mut acc = 0.0;
            for (j, &s) in summary.iter().enumerate() {
                acc += row[j] * s;
            }
            w_s[r] = acc;
        }

        let dot = |row: &[f64]| -> f64 { row.iter().zip(&w_s).map(|(a, b)| a * b).sum() };
        let pos: Vec<f64> = (0..n).map(|i| dot(h.row(i))).collect();
        let neg: Vec<f64> = (0..n).map(|i| dot(h_neg.row(i))).collect();

        let mut loss = 0.0;
        for i in 0..n {
            loss += softplus(-pos[i]) + softplus(neg[i]);
        }
        loss /= 2.0 * n as f64;
        Ok((loss, pos, neg))
    }

    /// Loss and exact gradients, encoder layers first, discriminator last.
    pub fn loss_and_grads(
        &self,
        g: &Graph,
        perm: &[usize],
    ) -> Result<(f64, Vec<Mat>), GnnError> {
        let n = g.n_nodes();
        let clean = self.encoder.forward(g.features())?;
        let x_perm = g.features().permute_rows(perm);
        let corrupt = self.encoder.forward(&x_perm)?;
        let h = clean.embeddings();
        let h_neg = corrupt.embeddings();
        let hidden = h.cols;

        let mut pooled = vec![0.0f64; hidden];
        for i in 0..n {
            for (acc, &v) in pooled.iter_mut().zip(h.row(i)) {
                *acc += v;
            }
        }
        let mean_pool: Vec<f64> = pooled.iter().map(|&v| v / n as f64).collect();
        let summary: Vec<f64> = mean_pool.iter().map(|&v| sigmoid(v)).collect();

        let w = &self.objective.weights;
        let mut w_s = vec![0.0f64; hidden];
        for r in 0..hidden {
            let row = w.row(r);
            w_s[r] = row.iter().zip(&summary).map(|(a, b)| a * b).sum();
        }
        let dot = |row: &[f64]| -> f64 { row.iter().zip(&w_s).map(|(a, b)| a * b).sum() };

        let scale = 1.0 / (2.0 * n as f64);
        let mut loss = 0.0;
        // dL/dlogit per pair
        let mut g_pos = vec![0.0f64; n];
        let mut g_neg = vec![0.0f64; n];
        for i in 0..n {
            let p = dot(h.row(i));
            let q = dot(h_neg.row(i));
            loss += softplus(-p) + softplus(q);
            g_pos[i] = (sigmoid(p) - 1.0) * scale;
            g_neg[i] = sigmoid(q) * scale;
        }
        loss *= scale;

        // u = Σ_i g_pos_i·h_i + g_neg_i·h̃_i; dW = u·sᵀ; ds = Wᵀ·u
        let mut u = vec![0.0f64; hidden];
        for i in 0..n {
            for (acc, &v) in u.iter_mut().zip(h.row(i)) {
                *acc += g_pos[i] * v;
            }
            for (acc, &v) in u.iter_mut().zip(h_neg.row(i)) {
                *acc += g_neg[i] * v;
            }
        }
        let mut d_disc = Mat::zeros(hidden, hidden);
        for r in 0..hidden {
            for c in 0..hidden {
                *d_disc.at_mut(r, c) = u[r] * summary[c];
            }
        }
        let mut d_summary = vec![0.0f64; hidden];
        for r in 0..hidden {
            let row = w.row(r);
            for c in 0..hidden {
                d_summary[c] += row[c] * u[r];
            }
        }

        // Through the readout: s = σ(mean-pool), every clean row gets an
        // equal share.
        let d_pool_share: Vec<f64> = d_summary
            .iter()
            .zip(&summary)
            .map(|(&ds, &s)| ds * s * (1.0 - s) / n as f64)
            .collect();

        let mut d_h = Mat::zeros(n, hidden);
        let mut d_h_neg = Mat::zeros(n, hidden);
        for i in 0..n {
            let dh_row = d_h.row_mut(i);
            for j in 0..hidden {
                dh_row[j] = g_pos[i] * w_s[j] + d_pool_share[j];
            }
            let dn_row = d_h_neg.row_mut(i);
            for j in 0..hidden {
                dn_row[j] = g_neg[i] * w_s[j];
            }
        }

        let mut grads = self.encoder.zero_grads();
        self.encoder.backward_accumulate(&clean, &d_h, &mut grads);
        self.encoder
            .backward_accumulate(&corrupt, &d_h_neg, &mut grads);
        grads.push(d_disc);
        Ok((loss, grads))
    }
}
