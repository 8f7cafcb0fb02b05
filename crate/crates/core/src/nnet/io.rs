//! JSON form of a network:
//! `{"input_dim": p, "layers": [{"rows", "cols", "act", "W": [row-major], "b": [...]}]}`.
//!
//! Floats are written in shortest round-trip form, so save/load is exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Activation, Layer, Network};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    rows: usize,
    cols: usize,
    act: Activation,
    #[serde(rename = "W")]
    w: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    input_dim: usize,
    layers: Vec<LayerDoc>,
}

impl Network {
    pub fn to_json(&self) -> String {
        let doc = NetworkDoc {
            input_dim: self.input_dim,
            layers: self
                .layers
                .iter()
                .map(|l| LayerDoc {
                    rows: l.w.rows(),
                    cols: l.w.cols(),
                    act: l.act,
                    w: l.w.as_slice().to_vec(),
                    b: l.b.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("network documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Network> {
        let doc: NetworkDoc = serde_json::from_str(text)?;
        let layers = doc
            .layers
            .into_iter()
            .map(|l| Layer::new(Matrix::from_vec(l.rows, l.cols, l.w)?, l.b, l.act))
            .collect::<Result<Vec<_>>>()?;
        Network::new(doc.input_dim, layers)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(Error::from)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Network> {
        Network::from_json(&std::fs::read_to_string(path)?)
    }
}
