//! Shallow learners. Observations are columns throughout; covariances use
//! the 1/n convention.

mod autoencoder;
mod factor;
mod pca;
mod pls;
mod sir;

pub use autoencoder::{autoencoder_fit, split_objective, AutoencoderConfig, AutoencoderFit};
pub use factor::{factor_fit, FactorModel, FactorNorm};
pub use pca::{pca_fit, PcaModel};
pub use pls::{pls_fit, PlsModel};
pub use sir::{sir_fit, SirModel};
