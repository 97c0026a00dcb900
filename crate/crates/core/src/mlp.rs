//! Fully connected feed-forward networks trained by backpropagation.
//!
//! Each layer computes `z = a_prev · W + b` and `a = f(z)`; batches are
//! row-major `(batch, features)` matrices. The loss is the mean squared error
//! over every output entry of the batch.
//!
//! [`Network`] is the bare differentiable stack and is reused by the GAN in
//! [`crate::generator`]; [`MlpModel`] adds the regression training loop.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Sigmoid,
    Tanh,
    #[default]
    Relu,
    LeakyRelu,
}

impl Activation {
    pub const ALL: [Activation; 5] = [
        Activation::Identity,
        Activation::Sigmoid,
        Activation::Tanh,
        Activation::Relu,
        Activation::LeakyRelu,
    ];

    const LEAK: f64 = 0.01;

    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
            Activation::LeakyRelu => {
                if z > 0.0 {
                    z
                } else {
                    Self::LEAK * z
                }
            }
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu => {
                if z > 0.0 {
                    1.0
                } else {
                    Self::LEAK
                }
            }
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "identity" => Ok(Activation::Identity),
            "sigmoid" | "logistic" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            "leaky_relu" => Ok(Activation::LeakyRelu),
            other => Err(Error::Config(format!("unknown activation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// Shape `(inputs, outputs)`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

/// Gradient (or any other per-parameter quantity) with the network's shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            weights: net.layers.iter().map(|l| Array2::zeros(l.weights.raw_dim())).collect(),
            biases: net.layers.iter().map(|l| Array1::zeros(l.bias.raw_dim())).collect(),
        }
    }

    /// Weights then biases of each layer, in layer order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter().copied());
            out.extend(b.iter().copied());
        }
        out
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            *a += b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.flatten().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Activations cached by a forward pass.
pub struct ForwardCache {
    /// `inputs[l]` is the input of layer `l`; the last entry is the network output.
    inputs: Vec<Array2<f64>>,
    pre_activations: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.inputs.last().expect("cache holds at least the input")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<DenseLayer>,
}

impl Network {
    /// Symmetric uniform weights in `±1/√fan_in`, zero biases.
    pub fn init(
        sizes: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        validate_sizes(sizes)?;
        let n_layers = sizes.len() - 1;
        let layers = (0..n_layers)
            .map(|l| {
                let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
                let bound = 1.0 / (fan_in as f64).sqrt();
                let weights =
                    Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-bound..bound));
                DenseLayer {
                    weights,
                    bias: Array1::zeros(fan_out),
                    activation: if l + 1 == n_layers { output } else { hidden },
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_dim()];
        s.extend(self.layers.iter().map(|l| l.weights.ncols()));
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty network").weights.ncols()
    }

    pub fn weight_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len()).sum()
    }

    pub fn bias_count(&self) -> usize {
        self.layers.iter().map(|l| l.bias.len()).sum()
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Shape {
                expected: self.input_dim(),
                actual: x.ncols(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let mut a = x.to_owned();
        for layer in &self.layers {
            let mut z = a.dot(&layer.weights);
            z += &layer.bias;
            z.mapv_inplace(|v| layer.activation.apply(v));
            a = z;
        }
        Ok(a)
    }

    pub fn forward_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        let view = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
        Ok(self.forward(view)?.into_raw_vec_and_offset().0)
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> Result<ForwardCache> {
        self.check_input(&x)?;
        let mut inputs = Vec::with_capacity(self.layers.len() + 1);
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        inputs.push(x.to_owned());
        for layer in &self.layers {
            let mut z = inputs.last().unwrap().dot(&layer.weights);
            z += &layer.bias;
            let a = z.mapv(|v| layer.activation.apply(v));
            pre_activations.push(z);
            inputs.push(a);
        }
        Ok(ForwardCache {
            inputs,
            pre_activations,
        })
    }

    /// Backpropagates `d_output = ∂L/∂output` through the cached pass.
    /// Returns the parameter gradients and `∂L/∂input`.
    pub fn backward(&self, cache: &ForwardCache, d_output: &Array2<f64>) -> Result<(Gradients, Array2<f64>)> {
        let out = cache.output();
        if d_output.dim() != out.dim() {
            return Err(Error::Shape {
                expected: out.len(),
                actual: d_output.len(),
            });
        }
        let n = self.layers.len();
        let mut weights = Vec::with_capacity(n);
        let mut biases = Vec::with_capacity(n);
        let mut delta = d_output.clone();
        for l in (0..n).rev() {
            let layer = &self.layers[l];
            let z = &cache.pre_activations[l];
            let a = &cache.inputs[l + 1];
            ndarray::Zip::from(&mut delta)
                .and(z)
                .and(a)
                .for_each(|d, &z, &a| *d *= layer.activation.derivative(z, a));
            weights.push(cache.inputs[l].t().dot(&delta));
            biases.push(delta.sum_axis(Axis(0)));
            delta = delta.dot(&layer.weights.t());
        }
        weights.reverse();
        biases.reverse();
        Ok((Gradients { weights, biases }, delta))
    }

    /// Gradient of the batch MSE (mean over all entries) and the loss value.
    pub fn mse_gradient(&self, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<(Gradients, f64)> {
        if x.nrows() == 0 {
            return Err(Error::Shape {
                expected: 1,
                actual: 0,
            });
        }
        let cache = self.forward_cached(x)?;
        let out = cache.output();
        if y.dim() != out.dim() {
            return Err(Error::Shape {
                expected: out.len(),
                actual: y.len(),
            });
        }
        let residual = out - &y;
        let count = residual.len() as f64;
        let loss = residual.iter().map(|r| r * r).sum::<f64>() / count;
        let d_out = residual * (2.0 / count);
        let (grads, _) = self.backward(&cache, &d_out)?;
        Ok((grads, loss))
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend(l.weights.iter().copied());
            out.extend(l.bias.iter().copied());
        }
        out
    }

    /// Inverse of [`Network::flatten`].
    pub fn set_flat(&mut self, params: &[f64]) -> Result<()> {
        let total = self.weight_count() + self.bias_count();
        if params.len() != total {
            return Err(Error::Shape {
                expected: total,
                actual: params.len(),
            });
        }
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|w| *w = it.next().unwrap());
            l.bias.iter_mut().for_each(|b| *b = it.next().unwrap());
        }
        Ok(())
    }
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::Config(format!(
            "need at least an input and an output layer, got {sizes:?}"
        )));
    }
    if sizes.contains(&0) {
        return Err(Error::Config(format!("layer sizes must be >= 1, got {sizes:?}")));
    }
    Ok(())
}

/// Adaptive-moment optimiser state for one network.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: i32,
    m: Gradients,
    v: Gradients,
}

impl Adam {
    pub fn new(net: &Network, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: Gradients::zeros_like(net),
            v: Gradients::zeros_like(net),
        }
    }

    pub fn update(&mut self, net: &mut Network, grads: &Gradients) {
        self.step += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        let lr = self.learning_rate;
        let eps = self.epsilon;
        let apply = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        };
        for (l, layer) in net.layers.iter_mut().enumerate() {
            ndarray::Zip::from(&mut layer.weights)
                .and(&grads.weights[l])
                .and(&mut self.m.weights[l])
                .and(&mut self.v.weights[l])
                .for_each(|p, &g, m, v| apply(p, g, m, v));
            ndarray::Zip::from(&mut layer.bias)
                .and(&grads.biases[l])
                .and(&mut self.m.biases[l])
                .and(&mut self.v.biases[l])
                .for_each(|p, &g, m, v| apply(p, g, m, v));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub early_stop_patience: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            layer_sizes: vec![4, 64, 32, 3],
            hidden_activation: Activation::Relu,
            output_activation: Activation::Identity,
            learning_rate: 1e-3,
            max_epochs: 2000,
            early_stop_patience: 200,
            seed: 0,
        }
    }
}

impl MlpConfig {
    /// Default configuration with the given hidden layer widths between
    /// `inputs` and `outputs`.
    pub fn with_hidden(inputs: usize, hidden: &[usize], outputs: usize) -> Self {
        let mut layer_sizes = vec![inputs];
        layer_sizes.extend_from_slice(hidden);
        layer_sizes.push(outputs);
        Self {
            layer_sizes,
            ..Self::default()
        }
    }

    pub fn hidden(&self) -> &[usize] {
        &self.layer_sizes[1..self.layer_sizes.len() - 1]
    }

    pub fn validate(&self) -> Result<()> {
        validate_sizes(&self.layer_sizes)?;
        if self.layer_sizes.len() < 3 {
            return Err(Error::Config("at least one hidden layer is required".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }

    /// `Σ sizes[i]·sizes[i+1]` weights and `Σ sizes[i+1]` biases.
    pub fn parameter_count(&self) -> (usize, usize) {
        let w = self.layer_sizes.windows(2).map(|p| p[0] * p[1]).sum();
        let b = self.layer_sizes[1..].iter().sum();
        (w, b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_mse: f64,
    pub validation_mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub network: Network,
    pub config: MlpConfig,
    pub loss_history: Vec<EpochLoss>,
}

impl MlpModel {
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.network.forward_one(x)
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.network.forward(x)
    }

    pub fn backward(&self, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<Gradients> {
        Ok(self.network.mse_gradient(x, y)?.0)
    }

    /// `epoch,train_mse,validation_mse` with an empty cell when no validation
    /// set was used.
    pub fn loss_history_csv(&self) -> String {
        let mut out = String::from("epoch,train_mse,validation_mse\n");
        for e in &self.loss_history {
            let v = e.validation_mse.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", e.epoch, e.train_mse, v));
        }
        out
    }
}

pub fn init_mlp(config: &MlpConfig) -> Result<MlpModel> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let network = Network::init(
        &config.layer_sizes,
        config.hidden_activation,
        config.output_activation,
        &mut rng,
    )?;
    Ok(MlpModel {
        network,
        config: config.clone(),
        loss_history: Vec::new(),
    })
}

fn batch_mse(net: &Network, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64> {
    let out = net.forward(x)?;
    let residual = out - y;
    Ok(residual.iter().map(|r| r * r).sum::<f64>() / residual.len() as f64)
}

/// Full-batch Adam training. With a validation set, training stops once the
/// validation MSE has not improved for `early_stop_patience` epochs and the
/// best parameters seen are restored.
pub fn train_mlp(
    config: &MlpConfig,
    train_x: ArrayView2<f64>,
    train_y: ArrayView2<f64>,
    validation: Option<(ArrayView2<f64>, ArrayView2<f64>)>,
) -> Result<MlpModel> {
    let mut model = init_mlp(config)?;
    if train_x.nrows() == 0 {
        return Err(Error::Fit("no training rows".into()));
    }
    if train_x.nrows() != train_y.nrows() {
        return Err(Error::Shape {
            expected: train_x.nrows(),
            actual: train_y.nrows(),
        });
    }
    let mut adam = Adam::new(&model.network, config.learning_rate);
    let mut best: Option<(f64, Network)> = None;
    let mut since_best = 0;

    for epoch in 0..config.max_epochs {
        let (grads, loss) = model.network.mse_gradient(train_x, train_y)?;
        if !loss.is_finite() {
            return Err(Error::Training {
                epoch,
                message: format!("training loss is {loss}"),
            });
        }
        let validation_mse = match validation {
            Some((vx, vy)) => {
                let v = batch_mse(&model.network, vx, vy)?;
                if !v.is_finite() {
                    return Err(Error::Training {
                        epoch,
                        message: format!("validation loss is {v}"),
                    });
                }
                Some(v)
            }
            None => None,
        };
        model.loss_history.push(EpochLoss {
            epoch,
            train_mse: loss,
            validation_mse,
        });
        if let Some(v) = validation_mse {
            match &best {
                Some((b, _)) if v >= *b => since_best += 1,
                _ => {
                    best = Some((v, model.network.clone()));
                    since_best = 0;
                }
            }
            if since_best >= config.early_stop_patience {
                break;
            }
        }
        adam.update(&mut model.network, &grads);
    }
    if let Some((_, net)) = best {
        model.network = net;
    }
    Ok(model)
}

/// Per-query mean and population standard deviation across ensemble members.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsemblePrediction {
    pub mean: Array2<f64>,
    pub std: Array2<f64>,
}

/// Networks trained from seeds `config.seed + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpEnsemble {
    pub members: Vec<MlpModel>,
}

impl MlpEnsemble {
    pub fn train(
        config: &MlpConfig,
        train_x: ArrayView2<f64>,
        train_y: ArrayView2<f64>,
        n_init: usize,
    ) -> Result<Self> {
        if n_init == 0 {
            return Err(Error::Config("n_init must be >= 1".into()));
        }
        let members = (0..n_init)
            .into_par_iter()
            .map(|i| {
                let cfg = MlpConfig {
                    seed: config.seed.wrapping_add(i as u64),
                    ..config.clone()
                };
                train_mlp(&cfg, train_x, train_y, None).map_err(|e| e.context(format!("ensemble run {i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { members })
    }

    pub fn predict(&self, query: ArrayView2<f64>) -> Result<EnsemblePrediction> {
        let outs = self
            .members
            .iter()
            .map(|m| m.predict(query))
            .collect::<Result<Vec<_>>>()?;
        let n = outs.len() as f64;
        let mut mean = Array2::zeros(outs[0].raw_dim());
        for o in &outs {
            mean += o;
        }
        mean /= n;
        let mut var = Array2::<f64>::zeros(mean.raw_dim());
        for o in &outs {
            let d = o - &mean;
            var += &(&d * &d);
        }
        var /= n;
        Ok(EnsemblePrediction {
            mean,
            std: var.mapv(f64::sqrt),
        })
    }
}

pub fn ensemble_predict(
    config: &MlpConfig,
    train_x: ArrayView2<f64>,
    train_y: ArrayView2<f64>,
    query: ArrayView2<f64>,
    n_init: usize,
) -> Result<EnsemblePrediction> {
    MlpEnsemble::train(config, train_x, train_y, n_init)?.predict(query)
}

/// Row-major `Vec` rows to a matrix; all rows must share a length.
pub fn to_matrix<R: AsRef<[f64]>>(rows: &[R]) -> Result<Array2<f64>> {
    let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
    let mut flat = Vec::with_capacity(rows.len() * cols);
    for r in rows {
        let r = r.as_ref();
        if r.len() != cols {
            return Err(Error::Shape {
                expected: cols,
                actual: r.len(),
            });
        }
        flat.extend_from_slice(r);
    }
    Ok(Array2::from_shape_vec((rows.len(), cols), flat).expect("shape checked"))
}
