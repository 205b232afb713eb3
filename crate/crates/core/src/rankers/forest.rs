//! Random-forest impurity importance (mean decrease in Gini impurity).

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::model::{Dataset, RankingVector};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; 0 means floor(sqrt(p)).
    pub mtry: usize,
    /// 0 grows trees until leaves are pure.
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 200,
            mtry: 0,
            max_depth: 0,
            min_leaf: 1,
        }
    }
}

struct Grower<'a> {
    /// column-major copy of the features
    cols: &'a [Vec<f64>],
    labels: &'a [u8],
    mtry: usize,
    max_depth: usize,
    min_leaf: usize,
    importance: Vec<f64>,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let q = pos as f64 / n as f64;
    2.0 * q * (1.0 - q)
}

impl Grower<'_> {
    fn grow(&mut self, idx: &mut [usize], depth: usize, rng: &mut seed::Rng, features: &mut [usize]) {
        let n = idx.len();
        let pos = idx.iter().filter(|&&i| self.labels[i] == 1).count();
        if pos == 0 || pos == n || n < 2 * self.min_leaf || (self.max_depth > 0 && depth >= self.max_depth) {
            return;
        }
        let parent = gini(pos, n);
        // (feature, threshold, weighted child impurity)
        let mut best: Option<(usize, f64, f64)> = None;
        let mut informative_seen = 0;
        let mut pairs: Vec<(f64, u8)> = Vec::with_capacity(n);
        // partial Fisher-Yates: draw features until mtry non-constant ones
        // have been examined or all are exhausted
        for drawn in 0..features.len() {
            if informative_seen >= self.mtry {
                break;
            }
            let pick = rng.random_range(drawn..features.len());
            features.swap(drawn, pick);
            let f = features[drawn];
            let col = &self.cols[f];
            pairs.clear();
            pairs.extend(idx.iter().map(|&i| (col[i], self.labels[i])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pairs[0].0 == pairs[n - 1].0 {
                continue;
            }
            informative_seen += 1;
            let mut left_pos = 0;
            for s in 1..n {
                left_pos += pairs[s - 1].1 as usize;
                if pairs[s].0 == pairs[s - 1].0 || s < self.min_leaf || n - s < self.min_leaf {
                    continue;
                }
                let child = s as f64 * gini(left_pos, s) + (n - s) as f64 * gini(pos - left_pos, n - s);
                if best.is_none_or(|b| child < b.2) {
                    best = Some((f, 0.5 * (pairs[s - 1].0 + pairs[s].0), child));
                }
            }
        }
        let Some((f, threshold, child)) = best else {
            return;
        };
        let decrease = n as f64 * parent - child;
        if decrease <= 0.0 {
            return;
        }
        self.importance[f] += decrease;
        let col = &self.cols[f];
        let mut split = 0;
        for i in 0..n {
            if col[idx[i]] <= threshold {
                idx.swap(i, split);
                split += 1;
            }
        }
        let (left, right) = idx.split_at_mut(split);
        self.grow(left, depth + 1, rng, features);
        self.grow(right, depth + 1, rng, features);
    }
}

/// Importance of every feature, each tree's contribution normalized to sum
/// to one before summation, then the total normalized.
pub fn importances(d: &Dataset, params: &ForestParams, seed: u64) -> Vec<f64> {
    let (n, p) = (d.n_instances(), d.n_features());
    let cols: Vec<Vec<f64>> = (0..p).map(|j| d.features().column(j)).collect();
    let mtry = if params.mtry == 0 {
        ((p as f64).sqrt().floor() as usize).max(1)
    } else {
        params.mtry.min(p)
    };
    let per_tree: Vec<Vec<f64>> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed::derive_indexed(seed, "tree", t as u64));
            let mut idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut features: Vec<usize> = (0..p).collect();
            features.shuffle(&mut rng);
            let mut g = Grower {
                cols: &cols,
                labels: d.labels(),
                mtry,
                max_depth: params.max_depth,
                min_leaf: params.min_leaf.max(1),
                importance: vec![0.0; p],
            };
            g.grow(&mut idx, 0, &mut rng, &mut features);
            let total: f64 = g.importance.iter().sum();
            if total > 0.0 {
                g.importance.iter_mut().for_each(|v| *v /= total);
            }
            g.importance
        })
        .collect();
    let mut out = vec![0.0; p];
    for tree in &per_tree {
        for (o, v) in out.iter_mut().zip(tree) {
            *o += v;
        }
    }
    let total: f64 = out.iter().sum();
    if total > 0.0 {
        out.iter_mut().for_each(|v| *v /= total);
    }
    out
}

pub fn rank_random_forest(d: &Dataset, params: &ForestParams, seed: u64) -> Result<RankingVector> {
    RankingVector::from_scores_desc(&importances(d, params, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Matrix;

    fn noisy(n: usize, p: usize, s: u64, signal: bool) -> Dataset {
        let mut rng = seed::rng(s);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = u8::from(i % 2 == 0);
            let mut r: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..1.0)).collect();
            if signal {
                r[3] = label as f64 * 2.0 + rng.random_range(0.0..1.0);
            }
            y.push(if signal { label } else { rng.random_range(0..2) });
            rows.push(r);
        }
        Dataset::new((0..p).map(|j| format!("f{j}")).collect(), Matrix::from_rows(&rows).unwrap(), y).unwrap()
    }

    #[test]
    fn perfect_splitter_ranks_first() {
        let params = ForestParams { n_trees: 50, ..ForestParams::default() };
        let mut hits = 0;
        for s in 0..20 {
            let d = noisy(200, 16, s, true);
            let r = rank_random_forest(&d, &params, s).unwrap();
            assert!(r.is_permutation());
            hits += usize::from(r.ranks()[3] == 1.0);
        }
        assert!(hits >= 19, "{hits}/20");
    }

    #[test]
    fn importances_sum_to_one_and_are_reproducible() {
        let d = noisy(150, 9, 4, false);
        let params = ForestParams { n_trees: 30, ..ForestParams::default() };
        let a = importances(&d, &params, 11);
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(a, importances(&d, &params, 11));
        assert_ne!(a, importances(&d, &params, 12));
    }

    #[test]
    fn constant_feature_gets_no_importance() {
        let mut d = noisy(100, 4, 5, true);
        let mut x = d.features().clone();
        for i in 0..x.rows() {
            x.row_mut(i)[0] = 7.0;
        }
        d = d.with_features(x).unwrap();
        let params = ForestParams { n_trees: 20, ..ForestParams::default() };
        assert_eq!(importances(&d, &params, 1)[0], 0.0);
    }
}
