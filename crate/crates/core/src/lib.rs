//! Deep learning as stacked generalized linear models, built from scratch:
//! dense networks with backpropagation, first-order and Newton optimizers,
//! dropout and its ridge form, variational inference, shallow learners
//! (PCA, PLS, SIR, factor models, autoencoders), high-dimensional geometry
//! experiments, and a tabular ranking pipeline scored by NDCG.
//!
//! Matrices store one observation per column.

pub mod bayes;
pub mod cli;
pub mod data;
pub mod error;
pub mod experiments;
pub mod figure;
pub mod geom;
pub mod identities;
pub mod linalg;
pub mod nnet;
pub mod optim;
pub mod pipeline;
pub mod rng;
pub mod shallow;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use rng::Rng;
