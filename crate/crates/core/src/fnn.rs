//! Feedforward neural network response surface.
//!
//! Dense layers with ReLU hidden activations and an identity output layer,
//! mean-squared-error loss, hand-written reverse-mode gradients, and plain
//! mini-batch stochastic gradient descent with a step-decay learning rate.
//! Training is single-threaded and deterministic for a fixed seed.

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RomError};
use crate::seeding::stream_rng;

/// Layer widths of the network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FnnArchitecture {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
}

impl FnnArchitecture {
    /// The default four-hidden-layer stack 45-60-80-25.
    pub fn default_hidden(input_dim: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden: vec![45, 60, 80, 25],
            output_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(RomError::Config("layer widths must be positive".into()));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(RomError::Config(
                "need at least one hidden layer with positive width".into(),
            ));
        }
        Ok(())
    }

    /// Widths including input and output: `[P, h_1, ..., h_L, D]`.
    fn widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden.len() + 2);
        w.push(self.input_dim);
        w.extend_from_slice(&self.hidden);
        w.push(self.output_dim);
        w
    }
}

/// Weights, biases, and output standardization of a trained network.
///
/// Layer `l` maps activations `a` to `a W_l + b_l`; hidden layers apply
/// `max(0, .)`, the output layer is linear.
#[derive(Debug, Clone)]
pub struct FnnModel {
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
    out_mean: Vec<f64>,
    out_std: Vec<f64>,
}

impl FnnModel {
    pub fn architecture(&self) -> FnnArchitecture {
        FnnArchitecture {
            input_dim: self.weights[0].nrows(),
            hidden: self.weights[..self.weights.len() - 1]
                .iter()
                .map(|w| w.ncols())
                .collect(),
            output_dim: self.weights.last().unwrap().ncols(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().unwrap().ncols()
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    /// Mutable parameter access, for gradient checks and hand-built nets.
    pub fn weights_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [Array1<f64>] {
        &mut self.biases
    }

    /// He-uniform initialization: `W ~ U(+-sqrt(6 / fan_in))`, zero biases.
    pub fn init(arch: &FnnArchitecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let widths = arch.widths();
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..widths.len() - 1 {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let bound = (6.0 / fan_in as f64).sqrt();
            let mut rng = stream_rng(seed, l as u64);
            weights.push(Array2::from_shape_fn((fan_in, fan_out), |_| {
                rng.gen_range(-bound..bound)
            }));
            biases.push(Array1::zeros(fan_out));
        }
        Ok(Self {
            weights,
            biases,
            out_mean: vec![0.0; arch.output_dim],
            out_std: vec![1.0; arch.output_dim],
        })
    }

    pub fn to_json(&self) -> String {
        let weights: Vec<Vec<Vec<f64>>> = self
            .weights
            .iter()
            .map(|w| w.rows().into_iter().map(|r| r.to_vec()).collect())
            .collect();
        let biases: Vec<Vec<f64>> = self.biases.iter().map(|b| b.to_vec()).collect();
        let arch = self.architecture();
        serde_json::to_string(&serde_json::json!({
            "arch": arch.widths(),
            "weights": weights,
            "biases": biases,
            "standardize": {"mean": self.out_mean, "std": self.out_std},
        }))
        .expect("FNN model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Std {
            mean: Vec<f64>,
            std: Vec<f64>,
        }
        #[derive(Deserialize)]
        struct Raw {
            arch: Vec<usize>,
            weights: Vec<Vec<Vec<f64>>>,
            biases: Vec<Vec<f64>>,
            standardize: Std,
        }
        let raw: Raw = serde_json::from_str(text)?;
        if raw.arch.len() < 3 || raw.weights.len() != raw.arch.len() - 1 {
            return Err(RomError::Data("FNN layer structure is inconsistent".into()));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..raw.weights.len() {
            let (rows, cols) = (raw.arch[l], raw.arch[l + 1]);
            let flat: Vec<f64> = raw.weights[l].iter().flatten().copied().collect();
            if raw.weights[l].len() != rows || flat.len() != rows * cols {
                return Err(RomError::Data(format!("layer {l} weight shape mismatch")));
            }
            weights.push(Array2::from_shape_vec((rows, cols), flat).unwrap());
            if raw.biases[l].len() != cols {
                return Err(RomError::Data(format!("layer {l} bias shape mismatch")));
            }
            biases.push(Array1::from_vec(raw.biases[l].clone()));
        }
        Ok(Self {
            weights,
            biases,
            out_mean: raw.standardize.mean,
            out_std: raw.standardize.std,
        })
    }
}

/// Raw network output (standardized space), one input vector.
pub fn fnn_forward(model: &FnnModel, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != model.input_dim() {
        return Err(RomError::Validation(format!(
            "input has {} coordinates, network expects {}",
            x.len(),
            model.input_dim()
        )));
    }
    let mut a = Array1::from_vec(x.to_vec());
    let last = model.weights.len() - 1;
    for (l, (w, b)) in model.weights.iter().zip(&model.biases).enumerate() {
        let mut z = a.dot(w) + b;
        if l < last {
            z.mapv_inplace(|v| v.max(0.0));
        }
        a = z;
    }
    Ok(a.to_vec())
}

/// De-standardized prediction for pipeline use.
pub fn fnn_predict(model: &FnnModel, x: &[f64]) -> Result<Vec<f64>> {
    let raw = fnn_forward(model, x)?;
    Ok(raw
        .iter()
        .zip(&model.out_mean)
        .zip(&model.out_std)
        .map(|((v, m), s)| m + s * v)
        .collect())
}

/// Mean over the batch of the squared error norm,
/// `(1/B) sum_m || y_m - f(x_m) ||^2`, in the network's output space.
pub fn fnn_loss(model: &FnnModel, x: &Array2<f64>, y: &Array2<f64>) -> Result<f64> {
    let (activations, _) = forward_batch(model, x)?;
    let pred = activations.last().unwrap();
    if y.dim() != pred.dim() {
        return Err(RomError::Data(format!(
            "target shape {:?} does not match prediction shape {:?}",
            y.dim(),
            pred.dim()
        )));
    }
    let b = x.nrows() as f64;
    Ok((pred - y).mapv(|v| v * v).sum() / b)
}

/// Activations per layer boundary and pre-activations per layer.
type BatchTrace = (Vec<Array2<f64>>, Vec<Array2<f64>>);

/// Per-layer activations and pre-activations of a batch.
fn forward_batch(model: &FnnModel, x: &Array2<f64>) -> Result<BatchTrace> {
    if x.ncols() != model.input_dim() {
        return Err(RomError::Validation(format!(
            "batch has {} columns, network expects {}",
            x.ncols(),
            model.input_dim()
        )));
    }
    if x.nrows() == 0 {
        return Err(RomError::Data("batch must be non-empty".into()));
    }
    let last = model.weights.len() - 1;
    let mut activations = vec![x.clone()];
    let mut pre = Vec::new();
    for (l, (w, b)) in model.weights.iter().zip(&model.biases).enumerate() {
        let z = activations.last().unwrap().dot(w) + b.view().insert_axis(ndarray::Axis(0));
        pre.push(z.clone());
        let a = if l < last { z.mapv(|v| v.max(0.0)) } else { z };
        activations.push(a);
    }
    Ok((activations, pre))
}

/// Gradients of [`fnn_loss`] with respect to every weight and bias.
#[derive(Debug, Clone)]
pub struct FnnGradient {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Reverse-mode gradients; the ReLU subgradient at 0 is taken as 0.
pub fn fnn_backward(model: &FnnModel, x: &Array2<f64>, y: &Array2<f64>) -> Result<FnnGradient> {
    let (activations, pre) = forward_batch(model, x)?;
    let pred = activations.last().unwrap();
    if y.dim() != pred.dim() {
        return Err(RomError::Data(format!(
            "target shape {:?} does not match prediction shape {:?}",
            y.dim(),
            pred.dim()
        )));
    }
    let batch = x.nrows() as f64;
    let layers = model.weights.len();
    let mut grad_w = vec![Array2::zeros((0, 0)); layers];
    let mut grad_b = vec![Array1::zeros(0); layers];
    // d loss / d z_L
    let mut delta = (pred - y) * (2.0 / batch);
    for l in (0..layers).rev() {
        grad_w[l] = activations[l].t().dot(&delta);
        grad_b[l] = delta.sum_axis(ndarray::Axis(0));
        if l > 0 {
            let back = delta.dot(&model.weights[l].t());
            delta = back * &pre[l - 1].mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
        }
    }
    Ok(FnnGradient {
        weights: grad_w,
        biases: grad_b,
    })
}

/// Stochastic-gradient-descent settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub initial_learning_rate: f64,
    /// Learning rate multiplier applied every `decay_every_epochs`.
    pub decay_factor: f64,
    pub decay_every_epochs: usize,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: 600,
            batch_size: 32,
            initial_learning_rate: 0.01,
            decay_factor: 0.5,
            decay_every_epochs: 150,
            seed: 0,
        }
    }
}

/// A trained network plus its per-epoch mean training loss.
#[derive(Debug)]
pub struct FnnTrainResult {
    pub model: FnnModel,
    pub loss_history: Vec<f64>,
}

/// Trains a network on normalized inputs and raw outputs.
///
/// Outputs are standardized per component internally (the model keeps the
/// statistics for prediction). Mini-batches are reshuffled every epoch from
/// the run seed; the learning rate follows the configured step decay.
pub fn fnn_train(
    x: &Array2<f64>,
    y: &Array2<f64>,
    arch: &FnnArchitecture,
    config: &TrainingConfig,
) -> Result<FnnTrainResult> {
    arch.validate()?;
    let m = x.nrows();
    if m == 0 {
        return Err(RomError::Data("training set must be non-empty".into()));
    }
    if y.nrows() != m {
        return Err(RomError::Data(format!(
            "{} output rows for {} input rows",
            y.nrows(),
            m
        )));
    }
    if x.ncols() != arch.input_dim || y.ncols() != arch.output_dim {
        return Err(RomError::Config(
            "architecture does not match the data dimensions".into(),
        ));
    }
    if config.epochs == 0 || config.batch_size == 0 {
        return Err(RomError::Config(
            "epochs and batch size must be positive".into(),
        ));
    }
    if !(config.initial_learning_rate.is_finite() && config.initial_learning_rate > 0.0) {
        return Err(RomError::Config("learning rate must be positive".into()));
    }

    // Standardize outputs per component.
    let d = y.ncols();
    let mut out_mean = vec![0.0; d];
    let mut out_std = vec![1.0; d];
    for j in 0..d {
        let col = y.column(j);
        let mean = col.sum() / m as f64;
        let var =
            col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m as f64 - 1.0).max(1.0);
        out_mean[j] = mean;
        out_std[j] = if var.sqrt() < 1e-12 { 1.0 } else { var.sqrt() };
    }
    let y_std = Array2::from_shape_fn((m, d), |(i, j)| (y[[i, j]] - out_mean[j]) / out_std[j]);

    let mut model = FnnModel::init(arch, config.seed)?;
    let mut history = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..m).collect();

    for epoch in 0..config.epochs {
        let lr = config.initial_learning_rate
            * config
                .decay_factor
                .powi((epoch / config.decay_every_epochs) as i32);
        // Fisher-Yates reshuffle from a per-epoch stream.
        let mut rng = stream_rng(config.seed, 0xF00D + epoch as u64);
        for i in (1..m).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        let mut start = 0;
        while start < m {
            let end = (start + config.batch_size).min(m);
            let idx = &order[start..end];
            let xb = Array2::from_shape_fn((idx.len(), x.ncols()), |(i, j)| x[[idx[i], j]]);
            let yb = Array2::from_shape_fn((idx.len(), d), |(i, j)| y_std[[idx[i], j]]);
            let loss = fnn_loss(&model, &xb, &yb)?;
            if !loss.is_finite() {
                return Err(RomError::Numerical(format!(
                    "training diverged at epoch {epoch} (learning rate {lr:e})"
                )));
            }
            epoch_loss += loss * idx.len() as f64;
            let grad = fnn_backward(&model, &xb, &yb)?;
            for l in 0..model.weights.len() {
                model.weights[l].scaled_add(-lr, &grad.weights[l]);
                model.biases[l].scaled_add(-lr, &grad.biases[l]);
            }
            start = end;
        }
        history.push(epoch_loss / m as f64);
    }
    model.out_mean = out_mean;
    model.out_std = out_std;
    Ok(FnnTrainResult {
        model,
        loss_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    use crate::seeding::stream_rng;

    fn tiny_arch() -> FnnArchitecture {
        FnnArchitecture {
            input_dim: 1,
            hidden: vec![8, 8],
            output_dim: 1,
        }
    }

    #[test]
    fn forward_zero_network_outputs_zero() {
        let arch = FnnArchitecture {
            input_dim: 3,
            hidden: vec![4],
            output_dim: 2,
        };
        let mut model = FnnModel::init(&arch, 0).unwrap();
        for w in &mut model.weights {
            w.fill(0.0);
        }
        let out = fnn_forward(&model, &[0.5, -0.5, 1.0]).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn relu_gates_single_neuron() {
        // One hidden neuron: W = [[1]], b = [-1]; x = 0.5 -> max(0, -0.5) = 0.
        let arch = FnnArchitecture {
            input_dim: 1,
            hidden: vec![1],
            output_dim: 1,
        };
        let mut model = FnnModel::init(&arch, 0).unwrap();
        model.weights[0][[0, 0]] = 1.0;
        model.biases[0][0] = -1.0;
        model.weights[1][[0, 0]] = 1.0;
        model.biases[1][0] = 0.0;
        assert_eq!(fnn_forward(&model, &[0.5]).unwrap(), vec![0.0]);
        // Above the gate the unit passes through.
        assert!((fnn_forward(&model, &[2.0]).unwrap()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hand_computed_1_2_1_network() {
        let arch = FnnArchitecture {
            input_dim: 1,
            hidden: vec![2],
            output_dim: 1,
        };
        let mut model = FnnModel::init(&arch, 0).unwrap();
        model.weights[0] = Array2::from_shape_vec((1, 2), vec![2.0, -3.0]).unwrap();
        model.biases[0] = Array1::from_vec(vec![0.5, 1.0]);
        model.weights[1] = Array2::from_shape_vec((2, 1), vec![1.0, -2.0]).unwrap();
        model.biases[1] = Array1::from_vec(vec![0.25]);
        // x = 0.4: hidden pre = [1.3, -0.2] -> relu [1.3, 0]; out = 1.3 + 0.25.
        let out = fnn_forward(&model, &[0.4]).unwrap();
        assert!((out[0] - 1.55).abs() < 1e-15);
    }

    #[test]
    fn loss_values() {
        let arch = tiny_arch();
        let mut model = FnnModel::init(&arch, 1).unwrap();
        for w in &mut model.weights {
            w.fill(0.0);
        }
        let x = Array2::zeros((4, 1));
        let y = Array2::ones((4, 1));
        // Zero model, unit targets, D = 1: loss = 1.
        assert!((fnn_loss(&model, &x, &y).unwrap() - 1.0).abs() < 1e-15);
        let y0 = Array2::zeros((4, 1));
        assert_eq!(fnn_loss(&model, &x, &y0).unwrap(), 0.0);
    }

    #[test]
    fn loss_matches_brute_force_summation() {
        let arch = FnnArchitecture {
            input_dim: 3,
            hidden: vec![6, 5],
            output_dim: 2,
        };
        let model = FnnModel::init(&arch, 7).unwrap();
        let mut rng = stream_rng(8, 0);
        let x = Array2::from_shape_fn((10, 3), |_| rng.gen_range(-1.0..1.0));
        let y = Array2::from_shape_fn((10, 2), |_| rng.gen_range(-1.0..1.0));
        let loss = fnn_loss(&model, &x, &y).unwrap();
        let mut brute = 0.0;
        for i in 0..10 {
            let pred = fnn_forward(&model, &x.row(i).to_vec()).unwrap();
            for j in 0..2 {
                let e = y[[i, j]] - pred[j];
                brute += e * e;
            }
        }
        brute /= 10.0;
        assert!((loss - brute).abs() < 1e-12);
    }

    /// Central-difference gradient check over every parameter.
    fn check_gradients(arch: &FnnArchitecture, seed: u64, batch: usize) {
        let model = FnnModel::init(arch, seed).unwrap();
        let mut rng = stream_rng(seed, 0xABC);
        let x = Array2::from_shape_fn((batch, arch.input_dim), |_| rng.gen_range(-1.0..1.0));
        let y = Array2::from_shape_fn((batch, arch.output_dim), |_| rng.gen_range(-1.0..1.0));
        let grad = fnn_backward(&model, &x, &y).unwrap();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for l in 0..model.weights.len() {
            let (rows, cols) = model.weights[l].dim();
            for r in 0..rows {
                for c in 0..cols {
                    let mut plus = model.clone();
                    plus.weights[l][[r, c]] += h;
                    let mut minus = model.clone();
                    minus.weights[l][[r, c]] -= h;
                    let numeric = (fnn_loss(&plus, &x, &y).unwrap()
                        - fnn_loss(&minus, &x, &y).unwrap())
                        / (2.0 * h);
                    let analytic = grad.weights[l][[r, c]];
                    if analytic.abs() > 1e-8 {
                        worst = worst.max((numeric - analytic).abs() / analytic.abs());
                    }
                }
            }
            for c in 0..model.biases[l].len() {
                let mut plus = model.clone();
                plus.biases[l][c] += h;
                let mut minus = model.clone();
                minus.biases[l][c] -= h;
                let numeric = (fnn_loss(&plus, &x, &y).unwrap()
                    - fnn_loss(&minus, &x, &y).unwrap())
                    / (2.0 * h);
                let analytic = grad.biases[l][c];
                if analytic.abs() > 1e-8 {
                    worst = worst.max((numeric - analytic).abs() / analytic.abs());
                }
            }
        }
        assert!(worst < 1e-4, "max relative gradient error {worst:e}");
    }

    #[test]
    fn gradients_match_finite_differences_small_net() {
        check_gradients(
            &FnnArchitecture {
                input_dim: 4,
                hidden: vec![7, 5],
                output_dim: 3,
            },
            11,
            6,
        );
    }

    #[test]
    fn zero_batch_targets_zero_model_zero_gradients() {
        let arch = tiny_arch();
        let mut model = FnnModel::init(&arch, 2).unwrap();
        for w in &mut model.weights {
            w.fill(0.0);
        }
        let x = Array2::zeros((3, 1));
        let y = Array2::zeros((3, 1));
        let grad = fnn_backward(&model, &x, &y).unwrap();
        for g in &grad.weights {
            assert!(g.iter().all(|v| *v == 0.0));
        }
        for g in &grad.biases {
            assert!(g.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn duplicating_the_batch_leaves_gradients_unchanged() {
        let arch = FnnArchitecture {
            input_dim: 2,
            hidden: vec![5],
            output_dim: 2,
        };
        let model = FnnModel::init(&arch, 3).unwrap();
        let mut rng = stream_rng(4, 0);
        let x = Array2::from_shape_fn((5, 2), |_| rng.gen_range(-1.0..1.0));
        let y = Array2::from_shape_fn((5, 2), |_| rng.gen_range(-1.0..1.0));
        let doubled_x = ndarray::concatenate![ndarray::Axis(0), x, x];
        let doubled_y = ndarray::concatenate![ndarray::Axis(0), y, y];
        let g1 = fnn_backward(&model, &x, &y).unwrap();
        let g2 = fnn_backward(&model, &doubled_x, &doubled_y).unwrap();
        for (a, b) in g1.weights.iter().zip(&g2.weights) {
            for (u, v) in a.iter().zip(b.iter()) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn positive_homogeneity_without_biases() {
        let arch = FnnArchitecture {
            input_dim: 3,
            hidden: vec![6, 4],
            output_dim: 2,
        };
        // He init leaves biases at zero.
        let model = FnnModel::init(&arch, 5).unwrap();
        let x = [0.3, -0.7, 0.2];
        let c = 2.75;
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        let f1 = fnn_forward(&model, &x).unwrap();
        let f2 = fnn_forward(&model, &scaled).unwrap();
        for (a, b) in f1.iter().zip(&f2) {
            assert!((c * a - b).abs() < 1e-9, "{} vs {}", c * a, b);
        }
    }

    #[test]
    fn training_learns_linear_target() {
        // y = 2x on [-1, 1] with a tiny net.
        let m = 64;
        let mut rng = stream_rng(6, 0);
        let x = Array2::from_shape_fn((m, 1), |_| rng.gen_range(-1.0..1.0));
        let y = x.mapv(|v| 2.0 * v);
        let config = TrainingConfig {
            epochs: 600,
            batch_size: 16,
            seed: 1,
            ..Default::default()
        };
        let result = fnn_train(&x, &y, &tiny_arch(), &config).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..50 {
            let q = -1.0 + 2.0 * (i as f64 + 0.5) / 50.0;
            let pred = fnn_predict(&result.model, &[q]).unwrap()[0];
            num += (pred - 2.0 * q) * (pred - 2.0 * q);
            den += (2.0 * q) * (2.0 * q);
        }
        let rel = (num / den).sqrt();
        assert!(rel < 0.05, "validation relative error {rel}");
        // The loss trend must go down between the first and last 50 epochs.
        let first: f64 = result.loss_history[..50].iter().sum::<f64>() / 50.0;
        let last: f64 = result.loss_history[550..].iter().sum::<f64>() / 50.0;
        assert!(last <= first, "loss went up: {first} -> {last}");
    }

    #[test]
    fn training_is_deterministic() {
        let mut rng = stream_rng(7, 0);
        let x = Array2::from_shape_fn((32, 2), |_| rng.gen_range(-1.0..1.0));
        let y = Array2::from_shape_fn((32, 1), |(i, _)| x[[i, 0]] - x[[i, 1]]);
        let arch = FnnArchitecture {
            input_dim: 2,
            hidden: vec![6],
            output_dim: 1,
        };
        let config = TrainingConfig {
            epochs: 40,
            seed: 12,
            ..Default::default()
        };
        let a = fnn_train(&x, &y, &arch, &config).unwrap();
        let b = fnn_train(&x, &y, &arch, &config).unwrap();
        assert_eq!(a.loss_history, b.loss_history);
        for (wa, wb) in a.model.weights.iter().zip(&b.model.weights) {
            assert_eq!(wa, wb);
        }
    }

    #[test]
    fn divergence_is_reported_with_epoch() {
        let mut rng = stream_rng(8, 0);
        let x = Array2::from_shape_fn((16, 1), |_| rng.gen_range(-1.0..1.0));
        let y = x.mapv(|v: f64| v * 3.0);
        let config = TrainingConfig {
            epochs: 200,
            initial_learning_rate: 1e6,
            seed: 2,
            ..Default::default()
        };
        let err = fnn_train(&x, &y, &tiny_arch(), &config).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("epoch"), "{msg}");
    }

    #[test]
    fn json_roundtrip_preserves_predictions() {
        let arch = FnnArchitecture {
            input_dim: 2,
            hidden: vec![5, 4],
            output_dim: 3,
        };
        let mut model = FnnModel::init(&arch, 9).unwrap();
        model.out_mean = vec![1.0, -2.0, 0.5];
        model.out_std = vec![2.0, 0.5, 1.5];
        let back = FnnModel::from_json(&model.to_json()).unwrap();
        let x = [0.2, -0.9];
        assert_eq!(
            fnn_predict(&model, &x).unwrap(),
            fnn_predict(&back, &x).unwrap()
        );
    }
}
