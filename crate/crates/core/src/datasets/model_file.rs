//! JSON model files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "method": "ann-iec",
//!   "layer_sizes": [3, 10, 9],
//!   "weights": [[...], [...]],
//!   "biases": [[...], [...]],
//!   "hidden_activation": "logsig",
//!   "output_activation": "linear",
//!   "input_encoding": "raw-codes",
//!   "seed": 42,
//!   "train_config": { ... },
//!   "final_mse": 0.00093
//! }
//! ```
//!
//! `weights[l]` is layer `l`'s `(fan_in, fan_out)` matrix flattened
//! row-major; `biases[l]` has `fan_out` entries. Numbers are written in
//! shortest round-trip form, so a save/load cycle restores every parameter
//! bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lm_trainer::TrainConfig;
use crate::mlp::{Activation, AnnKind, Layer, MlpNetwork};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Inputs are the integer ratio codes fed in unscaled.
const INPUT_ENCODING: &str = "raw-codes";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub method: AnnKind,
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub input_encoding: String,
    pub seed: u64,
    pub train_config: Option<TrainConfig>,
    pub final_mse: Option<f64>,
}

fn format_err(field: &'static str, message: impl Into<String>) -> Error {
    Error::ModelFormat {
        field,
        message: message.into(),
    }
}

impl ModelFile {
    pub fn from_network(net: &MlpNetwork, train_config: Option<TrainConfig>, final_mse: Option<f64>) -> Self {
        let layers = net.layers();
        Self {
            version: MODEL_FORMAT_VERSION,
            method: net.kind,
            layer_sizes: net.layer_sizes(),
            weights: layers.iter().map(|l| l.weights.clone()).collect(),
            biases: layers.iter().map(|l| l.biases.clone()).collect(),
            hidden_activation: layers[0].activation,
            output_activation: layers[layers.len() - 1].activation,
            input_encoding: INPUT_ENCODING.to_string(),
            seed: net.seed,
            train_config,
            final_mse,
        }
    }

    pub fn to_network(&self) -> Result<MlpNetwork> {
        if self.version != MODEL_FORMAT_VERSION {
            return Err(format_err(
                "version",
                format!("unsupported version {} (expected {MODEL_FORMAT_VERSION})", self.version),
            ));
        }
        if self.input_encoding != INPUT_ENCODING {
            return Err(format_err(
                "input_encoding",
                format!("unsupported encoding `{}`", self.input_encoding),
            ));
        }
        let sizes = &self.layer_sizes;
        if sizes.len() < 3 {
            return Err(format_err("layer_sizes", format!("need at least three layers, got {sizes:?}")));
        }
        let n_layers = sizes.len() - 1;
        if self.weights.len() != n_layers {
            return Err(format_err(
                "weights",
                format!("expected {n_layers} weight arrays, found {}", self.weights.len()),
            ));
        }
        if self.biases.len() != n_layers {
            return Err(format_err(
                "biases",
                format!("expected {n_layers} bias arrays, found {}", self.biases.len()),
            ));
        }
        let mut layers = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            if self.weights[l].len() != fan_in * fan_out {
                return Err(format_err(
                    "weights",
                    format!(
                        "layer {} expects {} weights, found {}",
                        l + 1,
                        fan_in * fan_out,
                        self.weights[l].len()
                    ),
                ));
            }
            if self.biases[l].len() != fan_out {
                return Err(format_err(
                    "biases",
                    format!("layer {} expects {fan_out} biases, found {}", l + 1, self.biases[l].len()),
                ));
            }
            layers.push(Layer {
                fan_in,
                fan_out,
                weights: self.weights[l].clone(),
                biases: self.biases[l].clone(),
                activation: if l + 1 == n_layers {
                    self.output_activation
                } else {
                    self.hidden_activation
                },
            });
        }
        MlpNetwork::from_layers(self.method, self.seed, layers)
            .map_err(|e| format_err("layer_sizes", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model file serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| format_err("document", e.to_string()))?;
        match value.get("version").and_then(serde_json::Value::as_u64) {
            Some(v) if v == u64::from(MODEL_FORMAT_VERSION) => {}
            Some(v) => {
                return Err(format_err(
                    "version",
                    format!("unsupported version {v} (expected {MODEL_FORMAT_VERSION})"),
                ))
            }
            None => return Err(format_err("version", "missing or not an integer")),
        }
        serde_json::from_value(value).map_err(|e| format_err("document", e.to_string()))
    }
}

/// Writes `net` and its training metadata to `path`.
pub fn save_model(
    net: &MlpNetwork,
    train_config: Option<TrainConfig>,
    final_mse: Option<f64>,
    path: impl AsRef<Path>,
) -> Result<()> {
    fs::write(path, ModelFile::from_network(net, train_config, final_mse).to_json())?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpNetwork> {
    let text = fs::read_to_string(path)?;
    ModelFile::from_json(&text)?.to_network()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio_coding::Scheme;

    fn net() -> MlpNetwork {
        MlpNetwork::init(AnnKind::Iec, &[3, 5, 9], 11).unwrap()
    }

    #[test]
    fn save_load_preserves_forward_bits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("iec.json");
        let original = net();
        save_model(&original, Some(TrainConfig::default()), Some(1.25e-4), &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, original);
        for codes in Scheme::Iec.all_vectors() {
            let x = codes.as_inputs();
            let a = original.forward(&x).unwrap();
            let b = loaded.forward(&x).unwrap();
            assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }

    #[test]
    fn wrong_weight_length_is_a_dimension_error() {
        let mut file = ModelFile::from_network(&net(), None, None);
        file.weights[1].pop();
        let text = file.to_json();
        match ModelFile::from_json(&text).unwrap().to_network() {
            Err(Error::ModelFormat { field: "weights", .. }) => {}
            other => panic!("expected weights error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_version_is_rejected() {
        let mut file = ModelFile::from_network(&net(), None, None);
        file.version = 99;
        match ModelFile::from_json(&file.to_json()) {
            Err(Error::ModelFormat { field: "version", .. }) => {}
            other => panic!("expected version error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_document_is_rejected() {
        let text = ModelFile::from_network(&net(), None, None).to_json();
        let cut = &text[..text.len() / 2];
        assert!(matches!(ModelFile::from_json(cut), Err(Error::ModelFormat { .. })));
    }

    #[test]
    fn layer_size_mismatch_with_method_is_rejected() {
        let mut file = ModelFile::from_network(&net(), None, None);
        file.method = AnnKind::Rogers;
        assert!(matches!(file.to_network(), Err(Error::ModelFormat { .. })));
    }

    #[test]
    fn documented_keys_are_present() {
        let v: serde_json::Value = serde_json::from_str(&ModelFile::from_network(&net(), None, None).to_json()).unwrap();
        for key in [
            "version",
            "method",
            "layer_sizes",
            "weights",
            "biases",
            "hidden_activation",
            "output_activation",
            "seed",
            "train_config",
            "final_mse",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["method"], "ann-iec");
        assert_eq!(v["hidden_activation"], "logsig");
    }
}
