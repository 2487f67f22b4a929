//! Fully connected feed-forward network with a logistic output, trained on
//! binary cross-entropy with mini-batch Adam.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{sigmoid, softplus};
use crate::matrix::Matrix;
use crate::seed::{self, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => libm::tanh(z),
            Activation::Sigmoid => sigmoid(z),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    #[inline]
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AnnConfig {
    fn default() -> Self {
        AnnConfig {
            hidden: alloc::vec![32, 16, 8],
            activation: Activation::Relu,
            epochs: 100,
            learning_rate: 1e-3,
            batch_size: 16,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// `weights` is `outputs x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Layer {
    fn n_params(&self) -> usize {
        self.weights.rows() * self.weights.cols() + self.bias.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnModel {
    pub layers: Vec<Layer>,
    pub activation: Activation,
    pub config: AnnConfig,
    pub seed: u64,
    /// Mean training loss of each epoch.
    pub loss_trace: Vec<f64>,
}

/// Cached forward pass for one input row.
struct Pass {
    /// Input to each layer followed by the final logistic output.
    acts: Vec<Vec<f64>>,
    /// Pre-activations of each layer.
    pre: Vec<Vec<f64>>,
}

impl AnnModel {
    /// Seeded initialization: He-uniform for ReLU layers, Glorot-uniform otherwise; zero biases.
    pub fn init(n_inputs: usize, config: &AnnConfig, seed: u64) -> Result<Self> {
        if n_inputs == 0 || config.hidden.contains(&0) {
            return Err(Error::BadHyperparameter("layer widths must be positive".into()));
        }
        let mut rng = seed::rng(seed, &[tag::INIT]);
        let mut dims = alloc::vec![n_inputs];
        dims.extend(&config.hidden);
        dims.push(1);
        let n_layers = dims.len() - 1;
        let layers = (0..n_layers)
            .map(|l| {
                let (fan_in, fan_out) = (dims[l], dims[l + 1]);
                let is_output = l + 1 == n_layers;
                let limit = if config.activation == Activation::Relu && !is_output {
                    libm::sqrt(6.0 / fan_in as f64)
                } else {
                    libm::sqrt(6.0 / (fan_in + fan_out) as f64)
                };
                let mut w = Matrix::zeros(fan_out, fan_in);
                for v in w.as_mut_slice() {
                    *v = rng.gen_range(-limit..limit);
                }
                Layer { weights: w, bias: alloc::vec![0.0; fan_out] }
            })
            .collect();
        Ok(AnnModel { layers, activation: config.activation, config: config.clone(), seed, loss_trace: Vec::new() })
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].weights.cols()
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Layer::n_params).sum()
    }

    fn forward(&self, row: &[f64]) -> Pass {
        let mut acts = alloc::vec![row.to_vec()];
        let mut pre = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let input = &acts[l];
            let z: Vec<f64> = (0..layer.weights.rows())
                .map(|o| layer.bias[o] + layer.weights.row(o).iter().zip(input).map(|(w, a)| w * a).sum::<f64>())
                .collect();
            let a = if l == last { z.iter().map(|&v| sigmoid(v)).collect() } else { z.iter().map(|&v| self.activation.apply(v)).collect() };
            pre.push(z);
            acts.push(a);
        }
        Pass { acts, pre }
    }

    /// Output logit (pre-sigmoid).
    pub fn logit(&self, row: &[f64]) -> f64 {
        self.forward(row).pre.last().expect("output layer")[0]
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        sigmoid(self.logit(row))
    }

    /// Flattened parameters: per layer, weights row-major then biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        for layer in &self.layers {
            p.extend_from_slice(layer.weights.as_slice());
            p.extend_from_slice(&layer.bias);
        }
        p
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::DimensionMismatch { expected: self.n_params(), got: params.len() });
        }
        let mut at = 0;
        for layer in &mut self.layers {
            let nw = layer.weights.as_slice().len();
            layer.weights.as_mut_slice().copy_from_slice(&params[at..at + nw]);
            at += nw;
            let nb = layer.bias.len();
            layer.bias.copy_from_slice(&params[at..at + nb]);
            at += nb;
        }
        Ok(())
    }

    /// Mean binary cross-entropy over `rows` and its gradient, flattened like [`Self::parameters`].
    pub fn loss_and_gradient(&self, x: &Matrix, y: &[f64], rows: &[usize]) -> (f64, Vec<f64>) {
        let mut grads: Vec<(Matrix, Vec<f64>)> =
            self.layers.iter().map(|l| (Matrix::zeros(l.weights.rows(), l.weights.cols()), alloc::vec![0.0; l.bias.len()])).collect();
        let mut loss = 0.0;
        let last = self.layers.len() - 1;
        for &r in rows {
            let pass = self.forward(x.row(r));
            let z_out = pass.pre[last][0];
            loss += softplus(z_out) - y[r] * z_out;
            // dL/dz for the output layer
            let mut delta = alloc::vec![pass.acts[last + 1][0] - y[r]];
            for l in (0..=last).rev() {
                let (gw, gb) = &mut grads[l];
                let input = &pass.acts[l];
                for (o, &d) in delta.iter().enumerate() {
                    gb[o] += d;
                    for (g, &a) in gw.row_mut(o).iter_mut().zip(input) {
                        *g += d * a;
                    }
                }
                if l > 0 {
                    let w = &self.layers[l].weights;
                    delta = (0..w.cols())
                        .map(|i| {
                            let back: f64 = delta.iter().enumerate().map(|(o, d)| d * w.get(o, i)).sum();
                            back * self.activation.derivative(pass.pre[l - 1][i], pass.acts[l][i])
                        })
                        .collect();
                }
            }
        }
        let scale = 1.0 / rows.len() as f64;
        let mut flat = Vec::with_capacity(self.n_params());
        for (gw, gb) in &grads {
            flat.extend(gw.as_slice().iter().map(|g| g * scale));
            flat.extend(gb.iter().map(|g| g * scale));
        }
        (loss * scale, flat)
    }
}

/// Trains for exactly `config.epochs` epochs from a seeded initialization.
pub fn train_ann(x: &Matrix, labels: &[bool], config: &AnnConfig, seed: u64) -> Result<AnnModel> {
    if x.rows() != labels.len() {
        return Err(Error::DimensionMismatch { expected: x.rows(), got: labels.len() });
    }
    if !labels.iter().any(|&l| l) || labels.iter().all(|&l| l) {
        return Err(Error::SingleClass);
    }
    if config.batch_size == 0 || !(config.learning_rate > 0.0) {
        return Err(Error::BadHyperparameter("batch_size and learning_rate must be positive".into()));
    }
    let mut model = AnnModel::init(x.cols(), config, seed)?;
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
    let mut params = model.parameters();
    let mut m = alloc::vec![0.0; params.len()];
    let mut v = alloc::vec![0.0; params.len()];
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let mut rng = seed::rng(seed, &[tag::SHUFFLE]);
    let mut t = 0i32;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let (loss, grad) = model.loss_and_gradient(x, &y, batch);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFinite { stage: "epoch", index: epoch });
            }
            epoch_loss += loss * batch.len() as f64;
            t += 1;
            let bc1 = 1.0 - libm::pow(config.beta1, t as f64);
            let bc2 = 1.0 - libm::pow(config.beta2, t as f64);
            for i in 0..params.len() {
                m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
                v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
                params[i] -= config.learning_rate * (m[i] / bc1) / (libm::sqrt(v[i] / bc2) + config.epsilon);
            }
            model.set_parameters(&params)?;
        }
        model.loss_trace.push(epoch_loss / x.rows() as f64);
    }
    Ok(model)
}
