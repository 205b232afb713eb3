//! Gaussian-kernel soft-margin SVM trained by sequential minimal
//! optimization with second-order working-set selection.

use serde::{Deserialize, Serialize};

use crate::model::{median, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    /// Kernel width; `None` picks 1 / median pairwise squared distance.
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: None,
            tol: 1e-3,
            max_iter: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub gamma: f64,
    pub rho: f64,
    /// `y_i * alpha_i` for each support vector.
    coef: Vec<f64>,
    support: Vec<f64>,
    cols: usize,
    pub iterations: usize,
    pub converged: bool,
}

const MEDIAN_ROWS: usize = 300;
const TAU: f64 = 1e-12;

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// 1 / median squared distance over a strided subset of at most 300 rows.
pub fn median_gamma(x: &Matrix) -> f64 {
    let n = x.rows();
    let m = n.min(MEDIAN_ROWS);
    let idx: Vec<usize> = (0..m).map(|i| i * n / m).collect();
    let mut d = Vec::with_capacity(m * (m - 1) / 2);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            d.push(sq_dist(x.row(i), x.row(j)));
        }
    }
    let med = if d.is_empty() { 0.0 } else { median(&mut d) };
    if med > 0.0 {
        1.0 / med
    } else {
        1.0 / x.cols().max(1) as f64
    }
}

/// Result of the dual solver on a precomputed kernel.
pub(crate) struct DualSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves min ½ aᵀQa − eᵀa s.t. 0 ≤ a ≤ C, yᵀa = 0 with `Q = y yᵀ ∘ K`.
pub(crate) fn solve_dual(k: &[f64], y: &[f64], c: f64, eps: f64, max_iter: usize) -> DualSolution {
    let n = y.len();
    let kk = |i: usize, j: usize| k[i * n + j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut converged = false;
    let up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);
    while iterations < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v >= gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        if i == usize::MAX {
            converged = true;
            break;
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut obj_min = f64::INFINITY;
        let mut j = usize::MAX;
        for t in 0..n {
            if low(alpha[t], y[t]) {
                let v = y[t] * grad[t];
                if v >= gmax2 {
                    gmax2 = v;
                }
                let b = gmax + v;
                if b > 0.0 {
                    let mut quad = kk(i, i) + kk(t, t) - 2.0 * kk(i, t);
                    if quad <= 0.0 {
                        quad = TAU;
                    }
                    let obj = -(b * b) / quad;
                    if obj <= obj_min {
                        obj_min = obj;
                        j = t;
                    }
                }
            }
        }
        if gmax + gmax2 < eps || j == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = kk(i, i) + kk(j, j) - 2.0 * kk(i, j);
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        let (ki, kj) = (&k[i * n..(i + 1) * n], &k[j * n..(j + 1) * n]);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }

    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut n_free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        0.5 * (ub + lb)
    };
    DualSolution {
        alpha,
        rho,
        iterations,
        converged,
    }
}

fn gaussian_kernel(x: &Matrix, gamma: f64) -> Vec<f64> {
    let n = x.rows();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in i + 1..n {
            let v = (-gamma * sq_dist(x.row(i), x.row(j))).exp();
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

impl SvmModel {
    /// `x` should already be standardized.
    pub fn fit(x: &Matrix, labels: &[u8], params: &SvmParams) -> Self {
        let gamma = params.gamma.unwrap_or_else(|| median_gamma(x));
        let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let k = gaussian_kernel(x, gamma);
        let sol = solve_dual(&k, &y, params.c, params.tol, params.max_iter);
        let mut coef = Vec::new();
        let mut support = Vec::new();
        for (i, &a) in sol.alpha.iter().enumerate() {
            if a > 0.0 {
                coef.push(y[i] * a);
                support.extend_from_slice(x.row(i));
            }
        }
        Self {
            gamma,
            rho: sol.rho,
            coef,
            support,
            cols: x.cols(),
            iterations: sol.iterations,
            converged: sol.converged,
        }
    }

    pub fn n_support(&self) -> usize {
        self.coef.len()
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        let mut f = -self.rho;
        for (s, c) in self.support.chunks_exact(self.cols.max(1)).zip(&self.coef) {
            f += c * (-self.gamma * sq_dist(s, row)).exp();
        }
        f
    }
}
