//! Trainable clustering models.
//!
//! Two model families span the framework: a spectral-modularity clustering
//! head (direct clustering objective) and a contrastive mutual-information
//! objective whose embeddings are clustered by k-means. Both share the GCN
//! encoder with hand-derived gradients; analytic gradients are enforced by
//! the finite-difference suite.

pub mod adam;
pub mod checkpoint;
pub mod dgi;
pub mod dmon;
pub mod encoder;
pub mod kmeans;

use crate::graph::{Graph, Partition};
use crate::linalg::Mat;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dgi::{DgiModel, DgiObjective};
pub use dmon::{dmon_loss, dmon_loss_terms, DmonHead, DmonModel};
pub use encoder::{gcn_forward, GcnEncoder};

#[derive(Debug, Error)]
pub enum GnnError {
    #[error("bad architecture: {0}")]
    BadArchitecture(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("loss undefined on an empty edge set")]
    EmptyEdgeSet,
    #[error("cannot extract {k} clusters from {n_nodes} nodes")]
    KTooLarge { k: usize, n_nodes: usize },
}

/// The two implemented model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Dmon,
    Dgi,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Dmon => "dmon",
            ModelKind::Dgi => "dgi",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dmon" => Some(ModelKind::Dmon),
            "dgi" => Some(ModelKind::Dgi),
            _ => None,
        }
    }
}

/// A trainable model instance bound to one graph.
#[derive(Debug, Clone)]
pub enum Model {
    Dmon(DmonModel),
    Dgi(DgiModel),
}

impl Model {
    /// Builds a Glorot-initialized model. `dims` chains the encoder,
    /// starting at the graph's feature dimension.
    pub fn new(
        kind: ModelKind,
        g: &Graph,
        dims: &[usize],
        k: usize,
        collapse_weight: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, GnnError> {
        match kind {
            ModelKind::Dmon => Ok(Model::Dmon(DmonModel::new(g, dims, k, collapse_weight, rng)?)),
            ModelKind::Dgi => Ok(Model::Dgi(DgiModel::new(g, dims, rng)?)),
        }
    }

    /// Rebuilds a model from checkpoint tensors (encoder layers first,
    /// head/discriminator last).
    pub fn from_tensors(
        kind: ModelKind,
        g: &Graph,
        mut tensors: Vec<Mat>,
        k: usize,
        collapse_weight: f64,
    ) -> Result<Self, GnnError> {
        if tensors.len() < 2 {
            return Err(GnnError::BadArchitecture(
                "checkpoint needs encoder and head tensors".into(),
            ));
        }
        let last = tensors.pop().expect("checked");
        let encoder = GcnEncoder::with_weights(g, tensors)?;
        match kind {
            ModelKind::Dmon => {
                if last.cols != k {
                    return Err(GnnError::DimensionMismatch {
                        expected: k,
                        got: last.cols,
                    });
                }
                Ok(Model::Dmon(DmonModel {
                    encoder,
                    head: DmonHead {
                        weights: last,
                        collapse_weight,
                    },
                }))
            }
            ModelKind::Dgi => {
                if last.rows != last.cols {
                    return Err(GnnError::BadArchitecture(
                        "discriminator must be square".into(),
                    ));
                }
                Ok(Model::Dgi(DgiModel {
                    encoder,
                    objective: DgiObjective { weights: last },
                }))
            }
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Dmon(_) => ModelKind::Dmon,
            Model::Dgi(_) => ModelKind::Dgi,
        }
    }

    /// Weight tensors in declaration order: encoder layers, then head or
    /// discriminator.
    pub fn params(&self) -> Vec<&Mat> {
        match self {
            Model::Dmon(m) => {
                let mut p: Vec<&Mat> = m.encoder.weights.iter().collect();
                p.push(&m.head.weights);
                p
            }
            Model::Dgi(m) => {
                let mut p: Vec<&Mat> = m.encoder.weights.iter().collect();
                p.push(&m.objective.weights);
                p
            }
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Mat> {
        match self {
            Model::Dmon(m) => {
                let mut p: Vec<&mut Mat> = m.encoder.weights.iter_mut().collect();
                p.push(&mut m.head.weights);
                p
            }
            Model::Dgi(m) => {
                let mut p: Vec<&mut Mat> = m.encoder.weights.iter_mut().collect();
                p.push(&mut m.objective.weights);
                p
            }
        }
    }

    /// Loss and exact analytic gradients of the model's objective. The DGI
    /// corruption permutation is drawn from `rng`; DMON consumes no
    /// randomness.
    pub fn loss_and_grads(
        &self,
        g: &Graph,
        rng: &mut ChaCha8Rng,
    ) -> Result<(f64, Vec<Mat>), GnnError> {
        match self {
            Model::Dmon(m) => m.loss_and_grads(g),
            Model::Dgi(m) => {
                let perm = dgi::draw_permutation(g.n_nodes(), rng);
                m.loss_and_grads(g, &perm)
            }
        }
    }

    /// Loss with an explicitly frozen corruption, for gradient checking.
    pub fn loss_frozen(&self, g: &Graph, perm: Option<&[usize]>) -> Result<f64, GnnError> {
        match self {
            Model::Dmon(m) => m.loss(g),
            Model::Dgi(m) => m.loss_with_perm(g, perm.expect("dgi corruption required")),
        }
    }

    /// Gradients with an explicitly frozen corruption.
    pub fn grads_frozen(
        &self,
        g: &Graph,
        perm: Option<&[usize]>,
    ) -> Result<Vec<Mat>, GnnError> {
        match self {
            Model::Dmon(m) => Ok(m.loss_and_grads(g)?.1),
            Model::Dgi(m) => Ok(m
                .loss_and_grads(g, perm.expect("dgi corruption required"))?
                .1),
        }
    }

    /// Hard partition of the graph's nodes. DMON takes the argmax over its
    /// soft assignments; DGI runs k-means (k-means++ seeding, 10 restarts,
    /// best inertia) on the embeddings.
    pub fn extract_partition(
        &self,
        g: &Graph,
        k: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Partition, GnnError> {
        if k > g.n_nodes() {
            return Err(GnnError::KTooLarge {
                k,
                n_nodes: g.n_nodes(),
            });
        }
        match self {
            Model::Dmon(m) => {
                if k != m.k() {
                    return Err(GnnError::DimensionMismatch {
                        expected: m.k(),
                        got: k,
                    });
                }
                m.extract_partition(g)
            }
            Model::Dgi(m) => {
                let embeddings = gcn_forward(&m.encoder, g)?;
                let assignment = kmeans::kmeans(&embeddings, k, 10, rng);
                Ok(Partition::new(assignment, k).expect("kmeans ids in range"))
            }
        }
    }
}

/// Parameter gradient set of the selected loss; see [`Model::loss_and_grads`].
pub fn gradients(model: &Model, g: &Graph, rng: &mut ChaCha8Rng) -> Result<Vec<Mat>, GnnError> {
    Ok(model.loss_and_grads(g, rng)?.1)
}

/// Contrastive loss of a DGI model; corruption drawn from `rng`.
pub fn dgi_loss(model: &DgiModel, g: &Graph, rng: &mut ChaCha8Rng) -> Result<f64, GnnError> {
    model.loss(g, rng)
}
