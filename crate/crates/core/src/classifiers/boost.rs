//! Boosted trees in the AdaBoost family: each round fits a weighted
//! least-squares tree to the ±1 labels under the current exponential-loss
//! weights (a Newton step on the exponential loss) and adds it with
//! shrinkage.

use serde::{Deserialize, Serialize};

use super::tree::{self, RegressionTree};
use crate::model::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostParams {
    pub rounds: usize,
    pub learn_rate: f64,
    pub max_splits: usize,
    pub min_leaf: usize,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self {
            rounds: 100,
            learn_rate: 0.1,
            max_splits: 20,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    trees: Vec<RegressionTree>,
    learn_rate: f64,
    /// Mean training exponential loss after each round.
    pub loss_history: Vec<f64>,
}

impl BoostModel {
    pub fn fit(x: &Matrix, labels: &[u8], params: &BoostParams) -> Self {
        let n = x.rows();
        let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let sorted = tree::presort(x);
        let mut f = vec![0.0; n];
        let mut w = vec![1.0 / n as f64; n];
        let mut trees = Vec::with_capacity(params.rounds);
        let mut loss_history = Vec::with_capacity(params.rounds);
        for _ in 0..params.rounds {
            let t = tree::fit(x, &y, &w, sorted.clone(), params.max_splits, params.min_leaf);
            for i in 0..n {
                f[i] += params.learn_rate * t.predict(x.row(i));
            }
            trees.push(t);
            let mut total = 0.0;
            for i in 0..n {
                w[i] = (-y[i] * f[i]).exp();
                total += w[i];
            }
            loss_history.push(total / n as f64);
            w.iter_mut().for_each(|v| *v /= total);
        }
        Self {
            trees,
            learn_rate: params.learn_rate,
            loss_history,
        }
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        self.learn_rate * self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }
}
