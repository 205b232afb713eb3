//! Recursive feature elimination with a linear soft-margin SVM.

use rand::seq::SliceRandom;

use crate::error::Result;
use crate::ingest::Standardizer;
use crate::model::{Dataset, Matrix, RankingVector};
use crate::seed;

use super::pearson;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfeParams {
    pub c: f64,
    /// Share of surviving features removed per iteration; 0 removes one.
    pub chunk_fraction: f64,
    pub tol: f64,
    pub max_epochs: usize,
}

impl Default for RfeParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            chunk_fraction: 0.0,
            tol: 1e-3,
            max_epochs: 1000,
        }
    }
}

/// Linear L1-loss SVM trained by dual coordinate descent, with the bias
/// folded in as a constant input. Returns the feature weights (bias
/// excluded) and updates `alpha` in place so later calls can warm-start.
pub fn linear_svm_weights(x: &Matrix, labels: &[u8], alpha: &mut [f64], params: &RfeParams, seed: u64) -> Option<Vec<f64>> {
    let (n, p) = (x.rows(), x.cols());
    let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let qd: Vec<f64> = (0..n).map(|i| 1.0 + x.row(i).iter().map(|v| v * v).sum::<f64>()).collect();
    // w has p weights and the bias as its last entry
    let mut w = vec![0.0; p + 1];
    for i in 0..n {
        let a = alpha[i] * y[i];
        if a != 0.0 {
            for (wj, v) in w.iter_mut().zip(x.row(i)) {
                *wj += a * v;
            }
            w[p] += a;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seed::rng(seed);
    for _ in 0..params.max_epochs {
        order.shuffle(&mut rng);
        let (mut max_pg, mut min_pg) = (f64::NEG_INFINITY, f64::INFINITY);
        for &i in &order {
            let row = x.row(i);
            let g = y[i] * (w[p] + row.iter().zip(&w[..p]).map(|(a, b)| a * b).sum::<f64>()) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= params.c {
                g.max(0.0)
            } else {
                g
            };
            max_pg = max_pg.max(pg);
            min_pg = min_pg.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).clamp(0.0, params.c);
                let step = (alpha[i] - old) * y[i];
                for (wj, v) in w.iter_mut().zip(row) {
                    *wj += step * v;
                }
                w[p] += step;
            }
        }
        if max_pg - min_pg < params.tol {
            break;
        }
    }
    w.truncate(p);
    w.iter().all(|v| v.is_finite()).then_some(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfeTrace {
    pub ranking: RankingVector,
    /// Elimination rounds performed before a single feature remained.
    pub iterations: usize,
}

pub fn svm_rfe(d: &Dataset, params: &RfeParams, seed: u64) -> Result<RfeTrace> {
    let p = d.n_features();
    let mut surviving: Vec<usize> = (0..p).collect();
    // worst first
    let mut eliminated: Vec<usize> = Vec::with_capacity(p);
    let mut alpha = vec![0.0; d.n_instances()];
    let mut iterations = 0;
    while surviving.len() > 1 {
        let x = d.features().select_columns(&surviving);
        let x = Standardizer::fit(&x).transform(&x)?;
        let svm_seed = seed::derive_indexed(seed, "rfe-epoch-order", iterations as u64);
        let w = match linear_svm_weights(&x, d.labels(), &mut alpha, params, svm_seed) {
            Some(w) => w.iter().map(|v| v * v).collect::<Vec<f64>>(),
            None => {
                log::warn!("SVM-RFE: linear SVM failed at iteration {iterations}; using |correlation|");
                alpha.iter_mut().for_each(|a| *a = 0.0);
                let sub = d.select_columns(&surviving)?;
                pearson::scores(&sub)
            }
        };
        let n_remove = if params.chunk_fraction > 0.0 {
            ((params.chunk_fraction * surviving.len() as f64).floor() as usize).max(1)
        } else {
            1
        }
        .min(surviving.len() - 1);
        // least important first; among equals the higher index goes first
        let mut by_weight: Vec<usize> = (0..surviving.len()).collect();
        by_weight.sort_by(|&a, &b| w[a].total_cmp(&w[b]).then(surviving[b].cmp(&surviving[a])));
        let drop: Vec<usize> = by_weight[..n_remove].to_vec();
        eliminated.extend(drop.iter().map(|&pos| surviving[pos]));
        let mut keep = vec![true; surviving.len()];
        for &pos in &drop {
            keep[pos] = false;
        }
        surviving = surviving.into_iter().zip(keep).filter_map(|(j, k)| k.then_some(j)).collect();
        iterations += 1;
    }
    eliminated.extend(surviving);
    eliminated.reverse();
    Ok(RfeTrace {
        ranking: RankingVector::from_order(&eliminated)?,
        iterations,
    })
}

pub fn rank_svm_rfe(d: &Dataset, params: &RfeParams, seed: u64) -> Result<RankingVector> {
    Ok(svm_rfe(d, params, seed)?.ranking)
}
