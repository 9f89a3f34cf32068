//! Levenberg-Marquardt training for [`MlpNetwork`].
//!
//! Residuals are `e = forward(x) - t`, one per (pattern, output) pair, in
//! pattern-major order. Each epoch solves `(J^T J + mu I) d = -J^T e` by
//! Cholesky, accepts the step if the mean squared error drops (then
//! `mu /= mu_factor`), otherwise grows `mu` by `mu_factor` and retries.
//! Training stops at the MSE goal, the epoch budget, or when `mu` exceeds
//! `mu_max`, the last being reported as [`TrainError::Stalled`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::{AnnKind, MlpNetwork};

/// One supervised example: code inputs and a one-hot target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingPattern {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
    /// Row of the source table the pattern came from.
    pub source_row: usize,
    /// Set when the pattern is one member of a wildcard row's expansion.
    pub expanded: bool,
}

impl TrainingPattern {
    /// Pattern whose target is one-hot at zero-based `class` of `outputs`.
    pub fn one_hot(input: Vec<f64>, class: usize, outputs: usize) -> Result<Self> {
        if class >= outputs {
            return Err(Error::InvalidConfig(format!("class {class} out of range for {outputs} outputs")));
        }
        let mut target = vec![0.0; outputs];
        target[class] = 1.0;
        Ok(Self {
            input,
            target,
            source_row: class + 1,
            expanded: false,
        })
    }

    /// Zero-based index of the hot target component.
    pub fn target_class(&self) -> usize {
        self.target
            .iter()
            .position(|&t| t == 1.0)
            .expect("one-hot target")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mse_goal: f64,
    pub max_epochs: usize,
    pub mu_init: f64,
    pub mu_factor: f64,
    pub mu_max: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            mse_goal: 1e-3,
            max_epochs: 1000,
            mu_init: 1e-3,
            mu_factor: 10.0,
            mu_max: 1e10,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.mse_goal) || !positive(self.mu_init) || !positive(self.mu_max) {
            return Err(Error::InvalidConfig(
                "mse_goal, mu_init and mu_max must be positive".into(),
            ));
        }
        if !(self.mu_factor.is_finite() && self.mu_factor > 1.0) {
            return Err(Error::InvalidConfig("mu_factor must exceed 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidConfig("max_epochs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: usize,
    pub final_mse: f64,
    /// MSE before training, then after every accepted step.
    pub history: Vec<f64>,
    pub converged: bool,
    /// Damping value when training stopped.
    pub final_mu: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error(transparent)]
    Invalid(#[from] Error),
    /// Every candidate step was rejected until `mu` exceeded `mu_max`.
    #[error("training stalled: damping exceeded mu_max after {} epochs (MSE {:.3e})", .report.epochs, .report.final_mse)]
    Stalled {
        network: Box<MlpNetwork>,
        report: TrainReport,
    },
}

fn check_patterns(net: &MlpNetwork, patterns: &[TrainingPattern]) -> Result<()> {
    if patterns.is_empty() {
        return Err(Error::InvalidConfig("empty pattern set".into()));
    }
    for p in patterns {
        if p.input.len() != net.input_size() {
            return Err(Error::Shape {
                context: "pattern input",
                expected: net.input_size(),
                found: p.input.len(),
            });
        }
        if p.target.len() != net.output_size() {
            return Err(Error::Shape {
                context: "pattern target",
                expected: net.output_size(),
                found: p.target.len(),
            });
        }
    }
    Ok(())
}

fn residuals(net: &MlpNetwork, patterns: &[TrainingPattern]) -> Result<Vec<f64>> {
    let mut e = Vec::with_capacity(patterns.len() * net.output_size());
    for p in patterns {
        let y = net.forward(&p.input)?;
        e.extend(y.iter().zip(&p.target).map(|(y, t)| y - t));
    }
    Ok(e)
}

fn mean_square(e: &[f64]) -> f64 {
    e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64
}

/// Mean over patterns and outputs of the squared error.
pub fn mse(net: &MlpNetwork, patterns: &[TrainingPattern]) -> Result<f64> {
    check_patterns(net, patterns)?;
    Ok(mean_square(&residuals(net, patterns)?))
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Analytic Jacobian of the residuals with respect to the flattened
/// parameters (see [`MlpNetwork::params`] for the column order).
pub fn jacobian(net: &MlpNetwork, patterns: &[TrainingPattern]) -> Result<Matrix> {
    check_patterns(net, patterns)?;
    let outputs = net.output_size();
    let layers = net.layers();
    let mut offsets = Vec::with_capacity(layers.len());
    let mut acc = 0;
    for l in layers {
        offsets.push(acc);
        acc += l.param_count();
    }
    let mut jac = Matrix::zeros(patterns.len() * outputs, net.param_count());

    for (p_idx, p) in patterns.iter().enumerate() {
        let trace = net.forward_trace(&p.input)?;
        for k in 0..outputs {
            let row = jac.row_mut(p_idx * outputs + k);
            // delta = d y_k / d (pre-activation) of the current layer
            let last = layers.len() - 1;
            let mut delta: Vec<f64> = (0..outputs)
                .map(|j| {
                    if j == k {
                        layers[last].activation.derivative_from_output(trace[last + 1][j])
                    } else {
                        0.0
                    }
                })
                .collect();
            for l in (0..layers.len()).rev() {
                let layer = &layers[l];
                let input = &trace[l];
                let base = offsets[l];
                for (i, &x) in input.iter().enumerate() {
                    let dst = &mut row[base + i * layer.fan_out..base + (i + 1) * layer.fan_out];
                    for (d, &dj) in dst.iter_mut().zip(&delta) {
                        *d = x * dj;
                    }
                }
                let bias_base = base + layer.fan_in * layer.fan_out;
                row[bias_base..bias_base + layer.fan_out].copy_from_slice(&delta);
                if l > 0 {
                    let below = &layers[l - 1];
                    delta = (0..layer.fan_in)
                        .map(|i| {
                            let s: f64 = (0..layer.fan_out).map(|j| layer.weight(i, j) * delta[j]).sum();
                            s * below.activation.derivative_from_output(input[i])
                        })
                        .collect();
                }
            }
        }
    }
    Ok(jac)
}

/// `J^T e`, equal to half the gradient of the summed squared error.
pub fn gradient(jac: &Matrix, e: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; jac.cols];
    for (r, &er) in e.iter().enumerate() {
        for (gc, &j) in g.iter_mut().zip(jac.row(r)) {
            *gc += j * er;
        }
    }
    g
}

/// Upper triangle (and mirrored lower) of `J^T J`.
fn normal_matrix(jac: &Matrix) -> Matrix {
    let n = jac.cols;
    let mut h = Matrix::zeros(n, n);
    for r in 0..jac.rows {
        let row = jac.row(r);
        for a in 0..n {
            let ja = row[a];
            if ja == 0.0 {
                continue;
            }
            let hrow = &mut h.data[a * n..(a + 1) * n];
            for b in a..n {
                hrow[b] += ja * row[b];
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            h.data[a * n + b] = h.data[b * n + a];
        }
    }
    h
}

/// Solves `(h + mu I) x = rhs` by Cholesky; `None` if not positive definite.
fn solve_damped(h: &Matrix, mu: f64, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = h.rows;
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = h.data[i * n + j];
            if i == j {
                s += mu;
            }
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = rhs[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Trains a copy of `net` and returns it with its report.
pub fn train_lm(
    net: &MlpNetwork,
    patterns: &[TrainingPattern],
    config: &TrainConfig,
) -> std::result::Result<(MlpNetwork, TrainReport), TrainError> {
    config.validate()?;
    check_patterns(net, patterns)?;

    let mut net = net.clone();
    let mut params = net.params();
    let mut e = residuals(&net, patterns)?;
    let mut current = mean_square(&e);
    let mut mu = config.mu_init;
    let mut history = vec![current];
    let mut candidate = net.clone();

    while current > config.mse_goal && history.len() - 1 < config.max_epochs {
        let jac = jacobian(&net, patterns)?;
        let g = gradient(&jac, &e);
        let h = normal_matrix(&jac);
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        loop {
            let accepted = solve_damped(&h, mu, &neg_g).and_then(|step| {
                let trial: Vec<f64> = params.iter().zip(&step).map(|(p, d)| p + d).collect();
                candidate.set_params(&trial).ok()?;
                let trial_e = residuals(&candidate, patterns).ok()?;
                let trial_mse = mean_square(&trial_e);
                (trial_mse.is_finite() && trial_mse < current).then_some((trial, trial_e, trial_mse))
            });
            if let Some((trial, trial_e, trial_mse)) = accepted {
                params = trial;
                e = trial_e;
                current = trial_mse;
                net.set_params(&params)?;
                mu /= config.mu_factor;
                break;
            }
            mu *= config.mu_factor;
            if mu > config.mu_max {
                let report = TrainReport {
                    epochs: history.len() - 1,
                    final_mse: current,
                    history,
                    converged: false,
                    final_mu: mu,
                };
                return Err(TrainError::Stalled {
                    network: Box::new(net),
                    report,
                });
            }
        }
        history.push(current);
    }

    let report = TrainReport {
        epochs: history.len() - 1,
        final_mse: current,
        converged: current <= config.mse_goal,
        history,
        final_mu: mu,
    };
    Ok((net, report))
}

/// Leave-one-out score of one candidate topology.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub layer_sizes: Vec<usize>,
    /// Mean held-out MSE over all folds.
    pub score: f64,
    /// Held-out MSE of each fold, in pattern order.
    pub fold_mse: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub best: Vec<usize>,
    pub scores: Vec<CandidateScore>,
}

/// Leave-one-out cross-validation over candidate topologies.
///
/// Every fold trains a fresh network seeded with `config.seed` on all but
/// one pattern and scores the held-out pattern. A fold whose training
/// stalls is scored with the network it stalled on. The winner has the
/// lowest mean score; ties go to the fewest hidden units, then to the
/// earlier candidate.
pub fn cross_validate(
    kind: AnnKind,
    candidates: &[Vec<usize>],
    patterns: &[TrainingPattern],
    config: &TrainConfig,
) -> Result<CvReport> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("no candidate topologies".into()));
    }
    if patterns.len() < 2 {
        return Err(Error::InvalidConfig("leave-one-out needs at least two patterns".into()));
    }
    config.validate()?;
    let mut scores = Vec::with_capacity(candidates.len());
    for sizes in candidates {
        // Arity check up front so a bad candidate fails before any training.
        let template = MlpNetwork::init(kind, sizes, config.seed)?;
        check_patterns(&template, patterns)?;
        let mut fold_mse = Vec::with_capacity(patterns.len());
        for held in 0..patterns.len() {
            let train: Vec<TrainingPattern> = patterns
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != held)
                .map(|(_, p)| p.clone())
                .collect();
            let trained = match train_lm(&template, &train, config) {
                Ok((net, _)) => net,
                Err(TrainError::Stalled { network, .. }) => *network,
                Err(TrainError::Invalid(e)) => return Err(e),
            };
            fold_mse.push(mse(&trained, std::slice::from_ref(&patterns[held]))?);
        }
        let score = fold_mse.iter().sum::<f64>() / fold_mse.len() as f64;
        scores.push(CandidateScore {
            layer_sizes: sizes.clone(),
            score,
            fold_mse,
        });
    }
    let hidden = |s: &[usize]| s[1..s.len() - 1].iter().sum::<usize>();
    let best = scores
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| {
            a.score
                .total_cmp(&b.score)
                .then(hidden(&a.layer_sizes).cmp(&hidden(&b.layer_sizes)))
                .then(ia.cmp(ib))
        })
        .map(|(_, s)| s.layer_sizes.clone())
        .expect("non-empty");
    Ok(CvReport { best, scores })
}
