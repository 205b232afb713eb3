//! ReliefF for binary labels.

use rand::seq::index;
use rayon::prelude::*;

use crate::error::Result;
use crate::model::{Dataset, RankingVector};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliefParams {
    pub n_neighbors: usize,
    /// Number of sampled target instances; 0 iterates over every instance.
    pub sample_size: usize,
}

impl Default for ReliefParams {
    fn default() -> Self {
        Self {
            n_neighbors: 10,
            sample_size: 0,
        }
    }
}

/// Min-max scales each column to [0, 1]; constant columns become 0.
fn scaled_columns(d: &Dataset) -> Vec<f64> {
    let (n, p) = (d.n_instances(), d.n_features());
    let x = d.features();
    let mut out = vec![0.0; n * p];
    for j in 0..p {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            lo = lo.min(x.get(i, j));
            hi = hi.max(x.get(i, j));
        }
        let span = hi - lo;
        if span > 0.0 {
            for i in 0..n {
                out[i * p + j] = (x.get(i, j) - lo) / span;
            }
        }
    }
    out
}

/// Feature weights: mean separation from nearest misses minus mean
/// separation from nearest hits, under Manhattan distance.
pub fn weights(d: &Dataset, params: &ReliefParams, seed: u64) -> Vec<f64> {
    let (n, p) = (d.n_instances(), d.n_features());
    let z = scaled_columns(d);
    let row = |i: usize| &z[i * p..(i + 1) * p];
    let labels = d.labels();
    let n_cases = d.n_cases();
    let targets: Vec<usize> = if params.sample_size == 0 || params.sample_size >= n {
        (0..n).collect()
    } else {
        let mut t = index::sample(&mut seed::rng(seed), n, params.sample_size).into_vec();
        t.sort_unstable();
        t
    };
    let m = targets.len() as f64;

    let contributions: Vec<Vec<f64>> = targets
        .par_iter()
        .map(|&i| {
            let ri = row(i);
            let mut hits = Vec::new();
            let mut misses = Vec::new();
            for t in 0..n {
                if t == i {
                    continue;
                }
                let dist: f64 = ri.iter().zip(row(t)).map(|(a, b)| (a - b).abs()).sum();
                if labels[t] == labels[i] {
                    hits.push((dist, t));
                } else {
                    misses.push((dist, t));
                }
            }
            let own = if labels[i] == 1 { n_cases } else { n - n_cases };
            let k_hit = params.n_neighbors.min(own - 1);
            let k_miss = params.n_neighbors.min(n - own);
            let mut w = vec![0.0; p];
            for (set, k, sign) in [(&mut hits, k_hit, -1.0), (&mut misses, k_miss, 1.0)] {
                if k == 0 {
                    continue;
                }
                let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                if k < set.len() {
                    set.select_nth_unstable_by(k - 1, cmp);
                }
                let mut near = set[..k].to_vec();
                near.sort_by(cmp);
                let scale = sign / (m * k as f64);
                for &(_, t) in &near {
                    for (wj, (a, b)) in w.iter_mut().zip(ri.iter().zip(row(t))) {
                        *wj += scale * (a - b).abs();
                    }
                }
            }
            w
        })
        .collect();

    let mut w = vec![0.0; p];
    for c in &contributions {
        for (a, b) in w.iter_mut().zip(c) {
            *a += b;
        }
    }
    w
}

pub fn rank_relief(d: &Dataset, params: &ReliefParams, seed: u64) -> Result<RankingVector> {
    RankingVector::from_scores_desc(&weights(d, params, seed))
}
