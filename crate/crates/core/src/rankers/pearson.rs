use crate::error::Result;
use crate::model::{Dataset, RankingVector};

/// Absolute Pearson correlation of every feature with the 0/1 label.
/// Constant features score 0.
pub fn scores(d: &Dataset) -> Vec<f64> {
    let n = d.n_instances() as f64;
    let y: Vec<f64> = d.labels().iter().map(|&l| f64::from(l)).collect();
    let my = y.iter().sum::<f64>() / n;
    let vy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    (0..d.n_features())
        .map(|j| {
            let col = d.features().column(j);
            let mx = col.iter().sum::<f64>() / n;
            let (mut cov, mut vx) = (0.0, 0.0);
            for (a, b) in col.iter().zip(&y) {
                cov += (a - mx) * (b - my);
                vx += (a - mx) * (a - mx);
            }
            if vx <= 1e-24 * n * mx.abs().max(1.0).powi(2) {
                0.0
            } else {
                (cov / (vx * vy).sqrt()).abs()
            }
        })
        .collect()
}

pub fn rank_pearson(d: &Dataset) -> Result<RankingVector> {
    RankingVector::from_scores_desc(&scores(d))
}
