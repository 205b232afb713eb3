//! Binomial logistic regression fitted by damped Newton iterations.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::model::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    pub max_iter: usize,
    pub tol: f64,
    pub l2: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-6,
            l2: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
#[inline]
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean negative log-likelihood (plus ridge term) and its gradient.
///
/// `params` holds the `p` weights followed by the intercept.
pub fn loss_and_gradient(params: &[f64], x: &Matrix, y: &[u8], l2: f64) -> (f64, Vec<f64>) {
    let p = x.cols();
    let n = x.rows() as f64;
    let (w, b) = (&params[..p], params[p]);
    let mut loss = 0.0;
    let mut grad = vec![0.0; p + 1];
    for i in 0..x.rows() {
        let row = x.row(i);
        let z = b + row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
        let t = f64::from(y[i]);
        loss += softplus(z) - t * z;
        let r = sigmoid(z) - t;
        for (g, a) in grad[..p].iter_mut().zip(row) {
            *g += r * a;
        }
        grad[p] += r;
    }
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    for (g, v) in grad[..p].iter_mut().zip(w) {
        *g += l2 * v;
    }
    (loss, grad)
}

fn hessian(params: &[f64], x: &Matrix, l2: f64) -> DMatrix<f64> {
    let p = x.cols();
    let n = x.rows() as f64;
    let mut h = DMatrix::<f64>::zeros(p + 1, p + 1);
    let mut aug = vec![1.0; p + 1];
    for i in 0..x.rows() {
        let row = x.row(i);
        aug[..p].copy_from_slice(row);
        let z = params[p] + row.iter().zip(&params[..p]).map(|(a, c)| a * c).sum::<f64>();
        let s = sigmoid(z);
        let v = s * (1.0 - s) / n;
        if v == 0.0 {
            continue;
        }
        for a in 0..=p {
            let va = v * aug[a];
            for c in a..=p {
                h[(a, c)] += va * aug[c];
            }
        }
    }
    for a in 0..=p {
        for c in 0..a {
            h[(a, c)] = h[(c, a)];
        }
        if a < p {
            h[(a, a)] += l2;
        }
    }
    h
}

pub fn fit(x: &Matrix, y: &[u8], params: &LogisticParams) -> LogisticModel {
    let p = x.cols();
    let mut theta = vec![0.0; p + 1];
    let (mut loss, mut grad) = loss_and_gradient(&theta, x, y, params.l2);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iter {
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < params.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut h = hessian(&theta, x, params.l2);
        let jitter = 1e-10 * (1.0 + h.diagonal().max());
        for a in 0..=p {
            h[(a, a)] += jitter;
        }
        let g = DVector::from_column_slice(&grad);
        let step: Vec<f64> = match h.cholesky() {
            Some(ch) => ch.solve(&g).iter().map(|v| -v).collect(),
            None => grad.iter().map(|v| -v).collect(),
        };
        // Backtracking on the Newton direction.
        let slope: f64 = step.iter().zip(&grad).map(|(s, g)| s * g).sum();
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            let (l, gr) = loss_and_gradient(&cand, x, y, params.l2);
            if l <= loss + 1e-4 * t * slope {
                theta = cand;
                loss = l;
                grad = gr;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // No further decrease is representable.
            converged = grad.iter().map(|g| g * g).sum::<f64>().sqrt() < params.tol;
            break;
        }
    }
    if !converged {
        converged = grad.iter().map(|g| g * g).sum::<f64>().sqrt() < params.tol;
    }
    LogisticModel {
        intercept: theta[p],
        weights: theta[..p].to_vec(),
        iterations,
        converged,
    }
}

impl LogisticModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.intercept + row.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>()
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }
}
