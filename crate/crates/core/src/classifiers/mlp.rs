//! Single-hidden-layer perceptron with logistic units, trained on
//! cross-entropy with validation-based early stopping.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::logistic::{sigmoid, softplus};
use crate::model::Matrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    /// Full-batch gradient descent with momentum.
    Momentum,
    /// Scaled conjugate gradient (Møller).
    Scg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpParams {
    pub hidden: usize,
    pub epochs: usize,
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Consecutive epochs without validation improvement before stopping.
    pub max_fail: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: 4,
            epochs: 100,
            optimizer: Optimizer::Scg,
            learning_rate: 0.5,
            momentum: 0.9,
            max_fail: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    hidden: usize,
    inputs: usize,
    params: Vec<f64>,
    pub epochs_run: usize,
    pub train_loss: Vec<f64>,
    pub converged: bool,
}

pub fn n_params(inputs: usize, hidden: usize) -> usize {
    hidden * (inputs + 2) + 1
}

struct Layout {
    p: usize,
    h: usize,
}

impl Layout {
    // [W1 (h x p) | b1 (h) | w2 (h) | b2]
    fn b1(&self) -> usize {
        self.h * self.p
    }
    fn w2(&self) -> usize {
        self.b1() + self.h
    }
    fn b2(&self) -> usize {
        self.w2() + self.h
    }
}

fn forward(theta: &[f64], l: &Layout, row: &[f64], z: &mut [f64]) -> f64 {
    let mut o = theta[l.b2()];
    for k in 0..l.h {
        let w = &theta[k * l.p..(k + 1) * l.p];
        let a = theta[l.b1() + k] + w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
        z[k] = sigmoid(a);
        o += theta[l.w2() + k] * z[k];
    }
    o
}

/// Mean cross-entropy of the network over `(x, y)`.
pub fn loss(theta: &[f64], x: &Matrix, y: &[u8], hidden: usize) -> f64 {
    let l = Layout { p: x.cols(), h: hidden };
    let mut z = vec![0.0; hidden];
    let mut total = 0.0;
    for i in 0..x.rows() {
        let o = forward(theta, &l, x.row(i), &mut z);
        total += softplus(o) - f64::from(y[i]) * o;
    }
    total / x.rows() as f64
}

/// Mean cross-entropy and its gradient by backpropagation.
pub fn loss_and_gradient(theta: &[f64], x: &Matrix, y: &[u8], hidden: usize) -> (f64, Vec<f64>) {
    let l = Layout { p: x.cols(), h: hidden };
    let mut grad = vec![0.0; theta.len()];
    let mut z = vec![0.0; hidden];
    let mut total = 0.0;
    for i in 0..x.rows() {
        let row = x.row(i);
        let o = forward(theta, &l, row, &mut z);
        let t = f64::from(y[i]);
        total += softplus(o) - t * o;
        let delta = sigmoid(o) - t;
        grad[l.b2()] += delta;
        for k in 0..l.h {
            grad[l.w2() + k] += delta * z[k];
            let dk = delta * theta[l.w2() + k] * z[k] * (1.0 - z[k]);
            grad[l.b1() + k] += dk;
            for (g, a) in grad[k * l.p..(k + 1) * l.p].iter_mut().zip(row) {
                *g += dk * a;
            }
        }
    }
    let n = x.rows() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    (total / n, grad)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct EarlyStop<'a> {
    val: Option<(&'a Matrix, &'a [u8])>,
    hidden: usize,
    max_fail: usize,
    best_loss: f64,
    best: Vec<f64>,
    fails: usize,
}

impl EarlyStop<'_> {
    /// Records the parameters after an epoch; true when training should stop.
    fn observe(&mut self, theta: &[f64], train_loss: f64) -> bool {
        let score = match self.val {
            Some((vx, vy)) => loss(theta, vx, vy, self.hidden),
            None => train_loss,
        };
        if score < self.best_loss {
            self.best_loss = score;
            self.best.copy_from_slice(theta);
            self.fails = 0;
        } else {
            self.fails += 1;
        }
        self.val.is_some() && self.fails >= self.max_fail
    }
}

/// Nguyen-Widrow initialization: hidden weight vectors of norm
/// `0.7 * h^(1/p)` with biases spread over the same range, so the hidden
/// units' hyperplanes start scattered across standardized input space.
fn nguyen_widrow(p: usize, h: usize, rng: &mut seed::Rng) -> Vec<f64> {
    let beta = 0.7 * (h as f64).powf(1.0 / p as f64);
    let mut theta = vec![0.0; n_params(p, h)];
    for u in 0..h {
        let w = &mut theta[u * p..(u + 1) * p];
        w.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        w.iter_mut().for_each(|v| *v *= beta / norm);
    }
    for u in 0..h {
        theta[h * p + u] = rng.random_range(-beta..beta);
    }
    for v in &mut theta[h * (p + 1)..] {
        *v = rng.random_range(-0.5..0.5);
    }
    theta
}

impl MlpModel {
    pub fn fit(x: &Matrix, y: &[u8], val: Option<(&Matrix, &[u8])>, params: &MlpParams, seed: u64) -> Self {
        let (p, h) = (x.cols(), params.hidden);
        let mut rng = seed::rng(seed);
        let mut theta = nguyen_widrow(p, h, &mut rng);
        let mut stop = EarlyStop {
            val,
            hidden: h,
            max_fail: params.max_fail,
            best_loss: f64::INFINITY,
            best: theta.clone(),
            fails: 0,
        };
        let (l0, _) = loss_and_gradient(&theta, x, y, h);
        stop.observe(&theta, l0);
        let mut train_loss = Vec::with_capacity(params.epochs);
        let epochs_run = match params.optimizer {
            Optimizer::Momentum => momentum(&mut theta, x, y, params, &mut stop, &mut train_loss),
            Optimizer::Scg => scg(&mut theta, x, y, params, &mut stop, &mut train_loss),
        };
        let converged = stop.best.iter().all(|v| v.is_finite());
        Self {
            hidden: h,
            inputs: p,
            params: stop.best,
            epochs_run,
            train_loss,
            converged,
        }
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        let mut z = vec![0.0; self.hidden];
        forward(&self.params, &Layout { p: self.inputs, h: self.hidden }, row, &mut z)
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }
}

fn momentum(
    theta: &mut [f64],
    x: &Matrix,
    y: &[u8],
    params: &MlpParams,
    stop: &mut EarlyStop<'_>,
    history: &mut Vec<f64>,
) -> usize {
    let mut velocity = vec![0.0; theta.len()];
    for epoch in 0..params.epochs {
        let (_, g) = loss_and_gradient(theta, x, y, params.hidden);
        for ((t, v), gi) in theta.iter_mut().zip(velocity.iter_mut()).zip(&g) {
            *v = params.momentum * *v - params.learning_rate * gi;
            *t += *v;
        }
        let l = loss(theta, x, y, params.hidden);
        history.push(l);
        if stop.observe(theta, l) {
            return epoch + 1;
        }
    }
    params.epochs
}

fn scg(
    theta: &mut [f64],
    x: &Matrix,
    y: &[u8],
    params: &MlpParams,
    stop: &mut EarlyStop<'_>,
    history: &mut Vec<f64>,
) -> usize {
    const SIGMA0: f64 = 1e-4;
    let (lambda_min, lambda_max) = (1e-15, 1e100);
    let hidden = params.hidden;
    let n = theta.len();
    let mut lambda = 1.0;
    let (mut f_old, mut g_new) = loss_and_gradient(theta, x, y, hidden);
    let mut g_old = g_new.clone();
    let mut d: Vec<f64> = g_new.iter().map(|g| -g).collect();
    let mut success = true;
    let mut n_success = 0;
    let (mut mu, mut kappa, mut theta_c) = (0.0, 0.0, 0.0);
    let mut x_new = vec![0.0; n];
    for epoch in 0..params.epochs {
        if success {
            mu = dot(&d, &g_new);
            if mu >= 0.0 {
                d = g_new.iter().map(|g| -g).collect();
                mu = dot(&d, &g_new);
            }
            kappa = dot(&d, &d);
            if kappa < f64::EPSILON {
                return epoch;
            }
            let sigma = SIGMA0 / kappa.sqrt();
            for k in 0..n {
                x_new[k] = theta[k] + sigma * d[k];
            }
            let (_, g_plus) = loss_and_gradient(&x_new, x, y, hidden);
            theta_c = g_plus.iter().zip(&g_new).zip(&d).map(|((a, b), dk)| dk * (a - b)).sum::<f64>() / sigma;
        }
        let mut delta = theta_c + lambda * kappa;
        if delta <= 0.0 {
            delta = lambda * kappa;
            lambda -= theta_c / kappa;
        }
        let alpha = -mu / delta;
        for k in 0..n {
            x_new[k] = theta[k] + alpha * d[k];
        }
        let f_new = loss(&x_new, x, y, hidden);
        let big_delta = 2.0 * (f_new - f_old) / (alpha * mu);
        if big_delta >= 0.0 && f_new.is_finite() {
            success = true;
            n_success += 1;
            theta.copy_from_slice(&x_new);
            f_old = f_new;
            g_old = std::mem::take(&mut g_new);
            g_new = loss_and_gradient(theta, x, y, hidden).1;
        } else {
            success = false;
        }
        history.push(f_old);
        // a rejected step leaves theta unchanged; it is not a validation failure
        if success && stop.observe(theta, f_old) {
            return epoch + 1;
        }
        if success && dot(&g_new, &g_new) == 0.0 {
            return epoch + 1;
        }
        if big_delta < 0.25 {
            lambda = (4.0 * lambda).min(lambda_max);
        }
        if big_delta > 0.75 {
            lambda = (0.5 * lambda).max(lambda_min);
        }
        if n_success == n {
            d = g_new.iter().map(|g| -g).collect();
            n_success = 0;
        } else if success {
            let gamma = (dot(&g_old, &g_new) - dot(&g_new, &g_new)) / mu;
            for k in 0..n {
                d[k] = gamma * d[k] - g_new[k];
            }
        }
    }
    params.epochs
}
