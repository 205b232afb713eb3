//! k-nearest neighbours under cosine distance.

use serde::{Deserialize, Serialize};

use crate::model::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    rows: Vec<f64>,
    norms: Vec<f64>,
    labels: Vec<u8>,
    cols: usize,
}

/// One minus the cosine of the angle; 1 when either vector is zero.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    cosine_with_norms(a, na, b, nb)
}

#[inline]
fn cosine_with_norms(a: &[f64], na: f64, b: &[f64], nb: f64) -> f64 {
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    1.0 - dot / (na * nb)
}

impl KnnModel {
    /// `k` is clamped to `M - 1` when the training set is too small.
    pub fn fit(x: &Matrix, labels: &[u8], k: usize) -> Self {
        let m = x.rows();
        let k_eff = if m <= k { (m - 1).max(1) } else { k };
        if k_eff != k {
            log::warn!("KNN: k={k} clamped to {k_eff} for {m} training rows");
        }
        let norms = (0..m)
            .map(|i| x.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        Self {
            k: k_eff,
            rows: x.as_slice().to_vec(),
            norms,
            labels: labels.to_vec(),
            cols: x.cols(),
        }
    }

    /// Fraction of the `k` nearest training rows that are cases.
    pub fn score_row(&self, q: &[f64]) -> f64 {
        let nq = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut dist: Vec<(f64, usize)> = self
            .norms
            .iter()
            .enumerate()
            .map(|(i, &ni)| {
                let r = &self.rows[i * self.cols..(i + 1) * self.cols];
                (cosine_with_norms(q, nq, r, ni), i)
            })
            .collect();
        let k = self.k.min(dist.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, cmp);
        }
        let cases = dist[..k].iter().filter(|(_, i)| self.labels[*i] == 1).count();
        cases as f64 / k as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_basics() {
        assert!(cosine_distance(&[1.0, 0.0], &[2.0, 0.0]).abs() < 1e-15);
        assert!((cosine_distance(&[1.0, 0.0], &[0.0, 3.0]) - 1.0).abs() < 1e-15);
        assert!((cosine_distance(&[1.0, 0.0], &[-1.0, 0.0]) - 2.0).abs() < 1e-15);
        assert_eq!(cosine_distance(&[0.0, 0.0], &[1.0, 1.0]), 1.0);
    }

    #[test]
    fn k_clamped_for_small_training_sets() {
        let x = Matrix::new(5, 1, vec![1.0, 2.0, -1.0, -2.0, 3.0]).unwrap();
        let m = KnnModel::fit(&x, &[1, 1, 0, 0, 1], 47);
        assert_eq!(m.k, 4);
    }

    #[test]
    fn doubling_rows_with_doubled_k_keeps_votes() {
        let pts = [[1.0, 0.2], [0.3, 1.0], [-1.0, 0.4], [-0.2, -1.0], [0.9, -0.7], [-0.6, -0.5]];
        let labels = [1, 0, 1, 0, 1, 0];
        let x = Matrix::from_rows(&pts.iter().map(|p| p.to_vec()).collect::<Vec<_>>()).unwrap();
        let mut doubled = Vec::new();
        let mut dl = Vec::new();
        for (p, &l) in pts.iter().zip(&labels) {
            doubled.push(p.to_vec());
            doubled.push(p.to_vec());
            dl.extend([l, l]);
        }
        let x2 = Matrix::from_rows(&doubled).unwrap();
        for k in 1..=3 {
            let a = KnnModel::fit(&x, &labels, k);
            let b = KnnModel::fit(&x2, &dl, 2 * k);
            for q in [[0.5, 0.5], [-0.3, 0.8], [0.1, -0.9]] {
                assert!((a.score_row(&q) - b.score_row(&q)).abs() < 1e-9);
            }
        }
    }
}
