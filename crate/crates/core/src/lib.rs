//! Unsupervised graph clustering suite: core library.
//!
//! Trains graph neural clustering models, selects checkpoints and tunes
//! hyperparameters using only unsupervised partition-quality metrics
//! (modularity, conductance), and quantifies how well those metrics predict
//! ground-truth clustering performance (NMI, macro-F1) across seeds,
//! datasets, reduced-edge regimes and synthetic benchmark grids.

// index loops are the clearer idiom in the dense numeric kernels
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod dataset;
pub mod gnn;
pub mod graph;
pub mod hpo;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod synthgen;
pub mod trainer;

pub use graph::{Graph, GraphError, Partition};
