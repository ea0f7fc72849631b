//! Small fully connected networks `ℝʳ → ℝʳ` trained on a weighted squared loss.
//!
//! Hidden layers apply `tanh`, the output layer is affine. Training is
//! full-batch Adam with a step learning-rate schedule; every run is a pure
//! function of the configuration seed and the data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlpError {
    #[error("invalid network configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid dataset: {0}")]
    Dataset(String),
    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    Divergence { epoch: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
}

impl Activation {
    #[inline]
    fn apply<T: Real>(self, x: T) -> T {
        match self {
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation output.
    #[inline]
    fn derivative_from_output<T: Real>(self, y: T) -> T {
        match self {
            Activation::Tanh => T::one() - y * y,
        }
    }
}

/// Architecture and training hyperparameters of one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig<T> {
    /// Input size, hidden sizes..., output size.
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: T,
    pub lr_decay_factor: T,
    pub lr_decay_every: usize,
}

impl<T: Real> MlpConfig<T> {
    /// `dim → hidden... → dim` with learning rate `1e-3` halved five times over the run.
    pub fn new(dim: usize, hidden: &[usize], epochs: usize, seed: u64) -> Self {
        let mut layer_sizes = Vec::with_capacity(hidden.len() + 2);
        layer_sizes.push(dim);
        layer_sizes.extend_from_slice(hidden);
        layer_sizes.push(dim);
        Self {
            layer_sizes,
            activation: Activation::Tanh,
            seed,
            epochs,
            learning_rate: T::lit(1e-3),
            lr_decay_factor: T::lit(0.5),
            lr_decay_every: (epochs / 5).max(1),
        }
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes.first().copied().unwrap_or(0)
    }

    pub fn output_size(&self) -> usize {
        self.layer_sizes.last().copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), MlpError> {
        let sizes = &self.layer_sizes;
        if sizes.len() < 3 {
            return Err(MlpError::Config(
                "need an input size, at least one hidden layer, and an output size".into(),
            ));
        }
        if sizes.contains(&0) {
            return Err(MlpError::Config("layer sizes must be positive".into()));
        }
        if sizes[0] != sizes[sizes.len() - 1] {
            return Err(MlpError::Config(format!(
                "input size {} differs from output size {}",
                sizes[0],
                sizes[sizes.len() - 1]
            )));
        }
        if self.epochs == 0 {
            return Err(MlpError::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > T::zero()) {
            return Err(MlpError::Config("learning rate must be positive".into()));
        }
        if !(self.lr_decay_factor > T::zero()) || self.lr_decay_every == 0 {
            return Err(MlpError::Config(
                "decay factor must be positive and decay period nonzero".into(),
            ));
        }
        Ok(())
    }

    /// Learning rate in effect during `epoch` (0-based).
    pub fn learning_rate_at(&self, epoch: usize) -> T {
        let drops = (epoch / self.lr_decay_every) as i32;
        self.learning_rate * self.lr_decay_factor.powi(drops)
    }
}

/// One affine map; `weights` is row-major `outputs × inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer<T> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<T>,
    pub biases: Vec<T>,
}

impl<T: Real> Layer<T> {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![T::zero(); inputs * outputs],
            biases: vec![T::zero(); outputs],
        }
    }

    #[inline]
    fn affine(&self, x: &[T], out: &mut Vec<T>) {
        out.clear();
        for (o, &b) in self.biases.iter().enumerate() {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let mut s = b;
            for (&w, &xi) in row.iter().zip(x) {
                s += w * xi;
            }
            out.push(s);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp<T> {
    pub layers: Vec<Layer<T>>,
    pub activation: Activation,
}

/// Gradient of the loss, shaped like the network it belongs to.
pub type Gradients<T> = Mlp<T>;

impl<T: Real> Mlp<T> {
    /// Glorot-uniform weights, zero biases.
    pub fn init(config: &MlpConfig<T>) -> Result<Self, MlpError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let layers = config
            .layer_sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let mut layer = Layer::zeros(fan_in, fan_out);
                for x in &mut layer.weights {
                    *x = T::lit(rng.gen_range(-bound..bound));
                }
                layer
            })
            .collect();
        Ok(Self {
            layers,
            activation: config.activation,
        })
    }

    /// All weights and biases zero.
    pub fn zeros(config: &MlpConfig<T>) -> Result<Self, MlpError> {
        config.validate()?;
        Ok(Self::zeros_with_sizes(&config.layer_sizes, config.activation))
    }

    fn zeros_with_sizes(sizes: &[usize], activation: Activation) -> Self {
        Self {
            layers: sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
            activation,
        }
    }

    fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| Layer::zeros(l.inputs, l.outputs))
                .collect(),
            activation: self.activation,
        }
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_size(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_size()];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Parameters in a fixed order: per layer, weights then biases.
    pub fn params(&self) -> impl Iterator<Item = &T> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>, MlpError> {
        if x.len() != self.input_size() {
            return Err(MlpError::DimensionMismatch {
                expected: self.input_size(),
                got: x.len(),
            });
        }
        Ok(self.forward_unchecked(x))
    }

    /// Forward pass; panics on a dimension mismatch.
    pub fn forward_unchecked(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.input_size(), "network input size");
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            layer.affine(&cur, &mut next);
            if l < last {
                next.iter_mut().for_each(|v| *v = self.activation.apply(*v));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// `Σᵢ wᵢ‖net(xᵢ) − zᵢ‖²`.
    pub fn loss(&self, data: &WeightedDataset<T>) -> Result<T, MlpError> {
        self.check_dataset(data)?;
        let mut total = T::zero();
        for ((x, z), &w) in data.inputs.iter().zip(&data.targets).zip(&data.weights) {
            if w == T::zero() {
                continue;
            }
            let y = self.forward_unchecked(x);
            let e: T = y.iter().zip(z).map(|(&a, &b)| (a - b) * (a - b)).sum();
            total += w * e;
        }
        Ok(total)
    }

    /// Loss and its exact gradient with respect to every weight and bias.
    pub fn loss_and_grad(&self, data: &WeightedDataset<T>) -> Result<(T, Gradients<T>), MlpError> {
        self.check_dataset(data)?;
        let mut grads = self.zeros_like();
        let mut loss = T::zero();
        let nl = self.layers.len();
        let mut acts: Vec<Vec<T>> = vec![Vec::new(); nl + 1];
        let mut delta: Vec<T> = Vec::new();
        let mut prev_delta: Vec<T> = Vec::new();

        for ((x, z), &w) in data.inputs.iter().zip(&data.targets).zip(&data.weights) {
            if w == T::zero() {
                continue;
            }
            acts[0].clear();
            acts[0].extend_from_slice(x);
            for l in 0..nl {
                let (done, rest) = acts.split_at_mut(l + 1);
                self.layers[l].affine(&done[l], &mut rest[0]);
                if l + 1 < nl {
                    rest[0]
                        .iter_mut()
                        .for_each(|v| *v = self.activation.apply(*v));
                }
            }
            let y = &acts[nl];
            delta.clear();
            let two_w = T::lit(2.0) * w;
            for (&yi, &zi) in y.iter().zip(z) {
                let e = yi - zi;
                loss += w * e * e;
                delta.push(two_w * e);
            }
            for l in (0..nl).rev() {
                let layer = &self.layers[l];
                let g = &mut grads.layers[l];
                let a_in = &acts[l];
                for (o, &d) in delta.iter().enumerate() {
                    g.biases[o] += d;
                    let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (gw, &a) in row.iter_mut().zip(a_in) {
                        *gw += d * a;
                    }
                }
                if l == 0 {
                    break;
                }
                prev_delta.clear();
                prev_delta.resize(layer.inputs, T::zero());
                for (o, &d) in delta.iter().enumerate() {
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (p, &wv) in prev_delta.iter_mut().zip(row) {
                        *p += wv * d;
                    }
                }
                for (p, &a) in prev_delta.iter_mut().zip(a_in) {
                    *p *= self.activation.derivative_from_output(a);
                }
                std::mem::swap(&mut delta, &mut prev_delta);
            }
        }
        Ok((loss, grads))
    }

    fn check_dataset(&self, data: &WeightedDataset<T>) -> Result<(), MlpError> {
        if data.input_dim() != self.input_size() {
            return Err(MlpError::DimensionMismatch {
                expected: self.input_size(),
                got: data.input_dim(),
            });
        }
        if data.target_dim() != self.output_size() {
            return Err(MlpError::DimensionMismatch {
                expected: self.output_size(),
                got: data.target_dim(),
            });
        }
        Ok(())
    }
}

/// Training samples with nonnegative per-sample weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDataset<T> {
    inputs: Vec<Vec<T>>,
    targets: Vec<Vec<T>>,
    weights: Vec<T>,
}

impl<T: Real> WeightedDataset<T> {
    pub fn new(inputs: Vec<Vec<T>>, targets: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self, MlpError> {
        if inputs.len() != targets.len() || inputs.len() != weights.len() {
            return Err(MlpError::Dataset(format!(
                "{} inputs, {} targets, {} weights",
                inputs.len(),
                targets.len(),
                weights.len()
            )));
        }
        if inputs.is_empty() {
            return Err(MlpError::Dataset("no samples".into()));
        }
        let din = inputs[0].len();
        let dout = targets[0].len();
        if inputs.iter().any(|x| x.len() != din) || targets.iter().any(|z| z.len() != dout) {
            return Err(MlpError::Dataset("ragged sample vectors".into()));
        }
        if inputs
            .iter()
            .chain(&targets)
            .flatten()
            .any(|v| !v.is_finite())
        {
            return Err(MlpError::Dataset("non-finite sample value".into()));
        }
        if weights.iter().any(|&w| !(w >= T::zero()) || !w.is_finite()) {
            return Err(MlpError::Dataset("weights must be finite and nonnegative".into()));
        }
        if !weights.iter().any(|&w| w > T::zero()) {
            return Err(MlpError::Dataset("at least one weight must be positive".into()));
        }
        Ok(Self {
            inputs,
            targets,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn target_dim(&self) -> usize {
        self.targets[0].len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

/// Adam over a flat parameter vector (β₁ = 0.9, β₂ = 0.999, ε = 1e-8).
#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
}

impl<T: Real> Adam<T> {
    pub fn new(num_params: usize) -> Self {
        Self {
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
            m: vec![T::zero(); num_params],
            v: vec![T::zero(); num_params],
            t: 0,
        }
    }

    pub fn step<'a, P, G>(&mut self, params: P, grads: G, lr: T)
    where
        P: Iterator<Item = &'a mut T>,
        G: Iterator<Item = &'a T>,
    {
        self.t += 1;
        let bc1 = T::one() - self.beta1.powi(self.t);
        let bc2 = T::one() - self.beta2.powi(self.t);
        let one = T::one();
        for (((p, &g), m), v) in params.zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (one - self.beta1) * g;
            *v = self.beta2 * *v + (one - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub net: Mlp<T>,
    pub final_loss: T,
    /// Loss before the update of each epoch.
    pub loss_history: Vec<T>,
}

/// Full-batch Adam for `config.epochs` steps starting from `net`.
pub fn train<T: Real>(
    net: &Mlp<T>,
    data: &WeightedDataset<T>,
    config: &MlpConfig<T>,
) -> Result<TrainOutcome<T>, MlpError> {
    config.validate()?;
    if net.layer_sizes() != config.layer_sizes {
        return Err(MlpError::Config(format!(
            "network sizes {:?} differ from configured {:?}",
            net.layer_sizes(),
            config.layer_sizes
        )));
    }
    let mut net = net.clone();
    let mut adam = Adam::new(net.num_params());
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let (loss, grads) = net.loss_and_grad(data)?;
        if !loss.is_finite() {
            return Err(MlpError::Divergence { epoch });
        }
        history.push(loss);
        let lr = config.learning_rate_at(epoch);
        adam.step(net.params_mut(), grads.params(), lr);
    }
    let final_loss = net.loss(data)?;
    if !final_loss.is_finite() {
        return Err(MlpError::Divergence {
            epoch: config.epochs,
        });
    }
    Ok(TrainOutcome {
        net,
        final_loss,
        loss_history: history,
    })
}
