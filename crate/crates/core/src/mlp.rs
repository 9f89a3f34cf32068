//! Feedforward multilayer perceptron.
//!
//! Each non-input layer computes `S_j = f(sum_i X_i W_ij + theta_j)` with
//! logsig hidden units and linear output units. Weights are stored
//! row-major with shape `(fan_in, fan_out)`, so `W_ij` lives at
//! `i * fan_out + j`.
//!
//! Parameter flattening (used by the Jacobian and the model file) walks the
//! layers in order and, per layer, lists the weights row-major followed by
//! the biases.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas_model::{FineFault, IecFault, Method, RogersFault};
use crate::ratio_coding::Scheme;

/// Half-width of the uniform initialisation interval.
pub const INIT_RANGE: f64 = 0.5;

/// Default threshold below which a decoded output is flagged low-confidence.
pub const DEFAULT_CONFIDENCE_THRESHOLD: f64 = 0.5;

/// Which ratio method a network classifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnnKind {
    #[serde(rename = "ann-rogers")]
    Rogers,
    #[serde(rename = "ann-iec")]
    Iec,
}

impl AnnKind {
    pub fn input_size(self) -> usize {
        self.scheme().arity()
    }

    pub fn output_size(self) -> usize {
        match self {
            AnnKind::Rogers => 12,
            AnnKind::Iec => 9,
        }
    }

    pub fn scheme(self) -> Scheme {
        match self {
            AnnKind::Rogers => Scheme::Rogers,
            AnnKind::Iec => Scheme::Iec,
        }
    }

    pub fn method(self) -> Method {
        match self {
            AnnKind::Rogers => Method::AnnRogers,
            AnnKind::Iec => Method::AnnIec,
        }
    }

    /// Fault named by a zero-based output index.
    pub fn fault(self, class: usize) -> Option<FineFault> {
        match self {
            AnnKind::Rogers => RogersFault::from_index(class + 1).map(FineFault::Rogers),
            AnnKind::Iec => IecFault::from_index(class + 1).map(FineFault::Iec),
        }
    }

    /// Single-hidden-layer sizes searched by leave-one-out selection. Smaller
    /// layers do not reach the MSE goal within the default epoch budget.
    pub fn hidden_candidates(self) -> &'static [usize] {
        match self {
            AnnKind::Rogers => &[12, 14, 16],
            AnnKind::Iec => &[8, 10, 12, 14, 16],
        }
    }

    /// Hidden-layer size picked by leave-one-out selection over
    /// [`AnnKind::hidden_candidates`] on the conflict-free training set with
    /// the default training configuration.
    pub fn default_hidden(self) -> usize {
        match self {
            AnnKind::Rogers => 16,
            AnnKind::Iec => 10,
        }
    }

    pub fn layer_sizes(self, hidden: &[usize]) -> Vec<usize> {
        let mut sizes = vec![self.input_size()];
        sizes.extend_from_slice(hidden);
        sizes.push(self.output_size());
        sizes
    }
}

impl fmt::Display for AnnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnnKind::Rogers => "rogers",
            AnnKind::Iec => "iec",
        })
    }
}

impl FromStr for AnnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rogers" | "ann-rogers" => Ok(AnnKind::Rogers),
            "iec" | "ann-iec" => Ok(AnnKind::Iec),
            other => Err(Error::InvalidConfig(format!("unknown network kind `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Logsig,
    Linear,
}

impl Activation {
    pub fn apply(self, n: f64) -> f64 {
        match self {
            Activation::Logsig => logsig(n),
            Activation::Linear => n,
        }
    }

    /// Derivative expressed through the activation value `a = f(n)`.
    pub fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Logsig => a * (1.0 - a),
            Activation::Linear => 1.0,
        }
    }
}

/// Logistic sigmoid `1 / (1 + e^-n)`.
pub fn logsig(n: f64) -> f64 {
    1.0 / (1.0 + (-n).exp())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub fan_in: usize,
    pub fan_out: usize,
    /// Row-major `(fan_in, fan_out)`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.weights[from * self.fan_out + to]
    }

    pub fn param_count(&self) -> usize {
        (self.fan_in + 1) * self.fan_out
    }

    fn apply(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(&self.biases);
        for (i, &x) in input.iter().enumerate() {
            let row = &self.weights[i * self.fan_out..(i + 1) * self.fan_out];
            for (acc, &w) in out.iter_mut().zip(row) {
                *acc += x * w;
            }
        }
        for v in out.iter_mut() {
            *v = self.activation.apply(*v);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpNetwork {
    pub kind: AnnKind,
    pub seed: u64,
    layers: Vec<Layer>,
}

impl MlpNetwork {
    /// Seeded network with weights and biases drawn uniformly from
    /// `[-0.5, 0.5]`.
    pub fn init(kind: AnnKind, layer_sizes: &[usize], seed: u64) -> Result<Self> {
        validate_sizes(kind, layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = layer_sizes.len() - 2;
        let layers = layer_sizes
            .windows(2)
            .enumerate()
            .map(|(l, pair)| {
                let (fan_in, fan_out) = (pair[0], pair[1]);
                let weights = (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-INIT_RANGE..=INIT_RANGE))
                    .collect();
                let biases = (0..fan_out)
                    .map(|_| rng.random_range(-INIT_RANGE..=INIT_RANGE))
                    .collect();
                Layer {
                    fan_in,
                    fan_out,
                    weights,
                    biases,
                    activation: if l == last { Activation::Linear } else { Activation::Logsig },
                }
            })
            .collect();
        Ok(Self { kind, seed, layers })
    }

    /// Assembles a network from explicit layers, checking every shape.
    pub fn from_layers(kind: AnnKind, seed: u64, layers: Vec<Layer>) -> Result<Self> {
        let mut sizes = Vec::with_capacity(layers.len() + 1);
        if let Some(first) = layers.first() {
            sizes.push(first.fan_in);
        }
        for (l, layer) in layers.iter().enumerate() {
            if sizes.last() != Some(&layer.fan_in) {
                return Err(Error::Shape {
                    context: "layer fan-in",
                    expected: *sizes.last().unwrap_or(&0),
                    found: layer.fan_in,
                });
            }
            if layer.weights.len() != layer.fan_in * layer.fan_out {
                return Err(Error::Shape {
                    context: "layer weights",
                    expected: layer.fan_in * layer.fan_out,
                    found: layer.weights.len(),
                });
            }
            if layer.biases.len() != layer.fan_out {
                return Err(Error::Shape {
                    context: "layer biases",
                    expected: layer.fan_out,
                    found: layer.biases.len(),
                });
            }
            if layer.weights.iter().chain(&layer.biases).any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!("layer {} has non-finite parameters", l + 1)));
            }
            sizes.push(layer.fan_out);
        }
        validate_sizes(kind, &sizes)?;
        Ok(Self { kind, seed, layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].fan_in];
        sizes.extend(self.layers.iter().map(|l| l.fan_out));
        sizes
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].fan_in
    }

    pub fn output_size(&self) -> usize {
        self.layers[self.layers.len() - 1].fan_out
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Flattened parameters: per layer, weights row-major then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Shape {
                context: "parameter vector",
                expected: self.param_count(),
                found: params.len(),
            });
        }
        let mut offset = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&params[offset..offset + nw]);
            offset += nw;
            let nb = l.biases.len();
            l.biases.copy_from_slice(&params[offset..offset + nb]);
            offset += nb;
        }
        Ok(())
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_size() {
            return Err(Error::Shape {
                context: "network input",
                expected: self.input_size(),
                found: input.len(),
            });
        }
        Ok(())
    }

    /// Output-layer vector for one input.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for l in &self.layers {
            l.apply(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Activations of every layer, input first, output last.
    pub fn forward_trace(&self, input: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_input(input)?;
        let mut trace = Vec::with_capacity(self.layers.len() + 1);
        trace.push(input.to_vec());
        for l in &self.layers {
            let mut out = Vec::with_capacity(l.fan_out);
            l.apply(trace.last().expect("non-empty"), &mut out);
            trace.push(out);
        }
        Ok(trace)
    }

    /// Forward pass followed by [`decode_output`].
    pub fn classify(&self, input: &[f64], threshold: f64) -> Result<Decoded> {
        decode_output(&self.forward(input)?, threshold)
    }
}

fn validate_sizes(kind: AnnKind, sizes: &[usize]) -> Result<()> {
    if sizes.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "a network needs input, at least one hidden and an output layer, got {sizes:?}"
        )));
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidConfig(format!("layer sizes must be positive, got {sizes:?}")));
    }
    if sizes[0] != kind.input_size() || sizes[sizes.len() - 1] != kind.output_size() {
        return Err(Error::InvalidConfig(format!(
            "{kind} networks are {}->...->{}, got {sizes:?}",
            kind.input_size(),
            kind.output_size()
        )));
    }
    Ok(())
}

/// Decoded network output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decoded {
    /// Zero-based winning class.
    pub class: usize,
    /// Winning component clipped into `[0, 1]`.
    pub confidence: f64,
    pub low_confidence: bool,
}

/// Argmax decoding; ties go to the lowest index.
pub fn decode_output(output: &[f64], threshold: f64) -> Result<Decoded> {
    if output.is_empty() {
        return Err(Error::Shape {
            context: "network output",
            expected: 1,
            found: 0,
        });
    }
    let mut class = 0;
    for (i, &v) in output.iter().enumerate().skip(1) {
        if v > output[class] {
            class = i;
        }
    }
    let confidence = output[class].clamp(0.0, 1.0);
    Ok(Decoded {
        class,
        confidence,
        low_confidence: confidence < threshold,
    })
}
