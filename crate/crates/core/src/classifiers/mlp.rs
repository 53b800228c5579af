//! Single-hidden-layer perceptron with sigmoid units, trained online by
//! backpropagation with momentum on the squared error `½ Σ e²`.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TrainingSet;
use crate::linalg::{dot, Matrix};

const INIT_RANGE: f64 = 0.05;

/// `round((attributes + classes) / 2)`, at least one unit.
pub fn default_hidden_units(n_features: usize, n_classes: usize) -> usize {
    (((n_features + n_classes) as f64 / 2.0).round() as usize).max(1)
}

#[inline]
fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Weights carry the bias in the last column of each layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    /// `hidden × (inputs + 1)`
    pub hidden: Matrix,
    /// `outputs × (hidden + 1)`
    pub output: Matrix,
}

/// Activations of one forward pass.
#[derive(Debug, Clone)]
pub struct Activations {
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

impl Mlp {
    pub fn random(n_inputs: usize, n_hidden: usize, n_outputs: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut init = |rows, cols| {
            let data = (0..rows * cols).map(|_| rng.random_range(-INIT_RANGE..INIT_RANGE)).collect();
            Matrix::from_vec(rows, cols, data).expect("sized above")
        };
        let hidden = init(n_hidden, n_inputs + 1);
        let output = init(n_outputs, n_hidden + 1);
        Self { hidden, output }
    }

    pub fn n_inputs(&self) -> usize {
        self.hidden.cols() - 1
    }

    pub fn n_hidden(&self) -> usize {
        self.hidden.rows()
    }

    pub fn n_outputs(&self) -> usize {
        self.output.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Activations {
        let n_in = self.n_inputs();
        let hidden: Vec<f64> = self.hidden.iter_rows().map(|w| sigmoid(dot(&w[..n_in], x) + w[n_in])).collect();
        let nh = hidden.len();
        let output = self.output.iter_rows().map(|w| sigmoid(dot(&w[..nh], &hidden) + w[nh])).collect();
        Activations { hidden, output }
    }

    /// `½ Σ_j (o_j − t_j)²` for one pattern.
    pub fn loss(&self, x: &[f64], target: &[f64]) -> f64 {
        let a = self.forward(x);
        0.5 * a.output.iter().zip(target).map(|(o, t)| (o - t) * (o - t)).sum::<f64>()
    }

    /// Gradient of [`Mlp::loss`] with respect to `(hidden, output)` weights.
    pub fn gradient(&self, x: &[f64], target: &[f64]) -> (Matrix, Matrix) {
        let a = self.forward(x);
        let (delta_out, delta_hidden) = self.deltas(&a, target);
        let mut g_hidden = Matrix::zeros(self.hidden.rows(), self.hidden.cols());
        let mut g_output = Matrix::zeros(self.output.rows(), self.output.cols());
        outer_with_bias(&delta_hidden, x, &mut g_hidden);
        outer_with_bias(&delta_out, &a.hidden, &mut g_output);
        (g_hidden, g_output)
    }

    fn deltas(&self, a: &Activations, target: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let delta_out: Vec<f64> = a.output.iter().zip(target).map(|(&o, &t)| (o - t) * o * (1.0 - o)).collect();
        let delta_hidden = (0..self.n_hidden())
            .map(|h| {
                let back: f64 = delta_out.iter().enumerate().map(|(j, d)| d * self.output[(j, h)]).sum();
                back * a.hidden[h] * (1.0 - a.hidden[h])
            })
            .collect();
        (delta_out, delta_hidden)
    }

    /// All weights, hidden layer first, row-major.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = self.hidden.as_slice().to_vec();
        p.extend_from_slice(self.output.as_slice());
        p
    }

    pub fn with_parameters(&self, params: &[f64]) -> Self {
        let nh = self.hidden.as_slice().len();
        let hidden =
            Matrix::from_vec(self.hidden.rows(), self.hidden.cols(), params[..nh].to_vec()).expect("same shape");
        let output =
            Matrix::from_vec(self.output.rows(), self.output.cols(), params[nh..].to_vec()).expect("same shape");
        Self { hidden, output }
    }
}

fn outer_with_bias(delta: &[f64], input: &[f64], out: &mut Matrix) {
    let n = input.len();
    for (r, &d) in delta.iter().enumerate() {
        let row = out.row_mut(r);
        for (w, x) in row[..n].iter_mut().zip(input) {
            *w = d * x;
        }
        row[n] = d;
    }
}

/// Adds `−η·δ·input + α·previous` to `weights` in place, updating `previous`.
fn step_with_bias(weights: &mut Matrix, previous: &mut Matrix, delta: &[f64], input: &[f64], lr: f64, momentum: f64) {
    let n = input.len();
    for (r, &d) in delta.iter().enumerate() {
        let w = weights.row_mut(r);
        let p = previous.row_mut(r);
        let g = -lr * d;
        for ((wi, pi), &x) in w[..n].iter_mut().zip(&mut p[..n]).zip(input) {
            let change = g * x + momentum * *pi;
            *wi += change;
            *pi = change;
        }
        let change = g + momentum * p[n];
        w[n] += change;
        p[n] = change;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MlpParams {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub hidden_units: Option<usize>,
}

/// Trains a network and returns it with the summed per-pattern loss of each
/// epoch. Patterns are shuffled once, then visited in that fixed order.
pub fn train_with_history(data: &TrainingSet<'_>, params: &MlpParams, seed: u64) -> (Mlp, Vec<f64>) {
    let n_in = data.x.cols();
    let n_hidden = params.hidden_units.unwrap_or_else(|| default_hidden_units(n_in, data.n_classes));
    let mut net = Mlp::random(n_in, n_hidden, data.n_classes, seed);
    let mut order: Vec<usize> = (0..data.x.rows()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15));

    let mut prev_hidden = Matrix::zeros(net.hidden.rows(), net.hidden.cols());
    let mut prev_output = Matrix::zeros(net.output.rows(), net.output.cols());
    let mut target = vec![0.0; data.n_classes];
    let mut history = Vec::with_capacity(params.epochs);
    for _ in 0..params.epochs {
        let mut epoch_loss = 0.0;
        for &r in &order {
            let x = data.x.row(r);
            target.iter_mut().for_each(|t| *t = 0.0);
            target[data.y[r]] = 1.0;
            let a = net.forward(x);
            epoch_loss += 0.5 * a.output.iter().zip(&target).map(|(o, t)| (o - t) * (o - t)).sum::<f64>();
            let (delta_out, delta_hidden) = net.deltas(&a, &target);
            step_with_bias(
                &mut net.output,
                &mut prev_output,
                &delta_out,
                &a.hidden,
                params.learning_rate,
                params.momentum,
            );
            step_with_bias(&mut net.hidden, &mut prev_hidden, &delta_hidden, x, params.learning_rate, params.momentum);
        }
        history.push(epoch_loss);
    }
    (net, history)
}
