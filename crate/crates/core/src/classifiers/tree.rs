//! Weighted least-squares regression trees grown best-first up to a split
//! budget. Used as the weak learner of the boosted ensemble.

use serde::{Deserialize, Serialize};

use crate::model::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    id = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }
}

/// Column-wise argsort of `x`, computed once and reused across fits.
pub fn presort(x: &Matrix) -> Vec<Vec<u32>> {
    (0..x.cols())
        .map(|j| {
            let mut idx: Vec<u32> = (0..x.rows() as u32).collect();
            idx.sort_by(|&a, &b| x.get(a as usize, j).total_cmp(&x.get(b as usize, j)));
            idx
        })
        .collect()
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct Pending {
    node: usize,
    sorted: Vec<Vec<u32>>,
    best: Option<Candidate>,
}

fn leaf_value(idx: &[u32], target: &[f64], weight: &[f64]) -> f64 {
    let (mut s, mut w) = (0.0, 0.0);
    for &i in idx {
        s += weight[i as usize] * target[i as usize];
        w += weight[i as usize];
    }
    if w > 0.0 {
        s / w
    } else {
        0.0
    }
}

fn best_split(x: &Matrix, sorted: &[Vec<u32>], target: &[f64], weight: &[f64], min_leaf: usize) -> Option<Candidate> {
    let list0 = &sorted[0];
    let (mut s_tot, mut w_tot) = (0.0, 0.0);
    for &i in list0 {
        s_tot += weight[i as usize] * target[i as usize];
        w_tot += weight[i as usize];
    }
    if w_tot <= 0.0 {
        return None;
    }
    let parent = s_tot * s_tot / w_tot;
    let n = list0.len();
    let mut best: Option<Candidate> = None;
    for (f, list) in sorted.iter().enumerate() {
        let (mut sl, mut wl) = (0.0, 0.0);
        for pos in 0..n.saturating_sub(1) {
            let i = list[pos] as usize;
            sl += weight[i] * target[i];
            wl += weight[i];
            let left_n = pos + 1;
            if left_n < min_leaf || n - left_n < min_leaf {
                continue;
            }
            let (a, b) = (x.get(i, f), x.get(list[pos + 1] as usize, f));
            if a >= b {
                continue;
            }
            let wr = w_tot - wl;
            if wl <= 0.0 || wr <= 0.0 {
                continue;
            }
            let sr = s_tot - sl;
            let gain = sl * sl / wl + sr * sr / wr - parent;
            if gain > best.as_ref().map_or(1e-14 * parent.abs().max(1e-300), |c| c.gain) {
                let mut threshold = 0.5 * (a + b);
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Candidate { feature: f, threshold, gain });
            }
        }
    }
    best
}

/// Grows a tree on the samples listed in `sorted` (per-feature argsort).
pub fn fit(
    x: &Matrix,
    target: &[f64],
    weight: &[f64],
    sorted: Vec<Vec<u32>>,
    max_splits: usize,
    min_leaf: usize,
) -> RegressionTree {
    let min_leaf = min_leaf.max(1);
    let mut nodes = vec![Node::Leaf { value: leaf_value(&sorted[0], target, weight) }];
    let best = best_split(x, &sorted, target, weight, min_leaf);
    let mut pending = vec![Pending { node: 0, sorted, best }];
    let mut go_left = vec![false; x.rows()];
    let mut splits = 0;
    while splits < max_splits {
        let Some(pick) = pending
            .iter()
            .enumerate()
            .filter_map(|(k, p)| p.best.as_ref().map(|c| (k, c.gain)))
            .fold(None, |acc: Option<(usize, f64)>, (k, g)| match acc {
                Some((_, bg)) if bg >= g => acc,
                _ => Some((k, g)),
            })
            .map(|(k, _)| k)
        else {
            break;
        };
        let leaf = pending.swap_remove(pick);
        let cand = leaf.best.expect("picked leaf has a split");
        for &i in &leaf.sorted[0] {
            go_left[i as usize] = x.get(i as usize, cand.feature) <= cand.threshold;
        }
        let (mut ls, mut rs) = (Vec::with_capacity(leaf.sorted.len()), Vec::with_capacity(leaf.sorted.len()));
        for list in &leaf.sorted {
            let (l, r): (Vec<u32>, Vec<u32>) = list.iter().partition(|&&i| go_left[i as usize]);
            ls.push(l);
            rs.push(r);
        }
        let left_id = nodes.len();
        nodes.push(Node::Leaf { value: leaf_value(&ls[0], target, weight) });
        nodes.push(Node::Leaf { value: leaf_value(&rs[0], target, weight) });
        nodes[leaf.node] = Node::Split {
            feature: cand.feature,
            threshold: cand.threshold,
            left: left_id,
            right: left_id + 1,
        };
        splits += 1;
        if splits < max_splits {
            let lb = best_split(x, &ls, target, weight, min_leaf);
            pending.push(Pending { node: left_id, sorted: ls, best: lb });
            let rb = best_split(x, &rs, target, weight, min_leaf);
            pending.push(Pending { node: left_id + 1, sorted: rs, best: rb });
        }
    }
    RegressionTree { nodes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_step_function_with_one_split() {
        let x = Matrix::new(6, 1, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let t = [-1.0, -1.0, -1.0, 1.0, 1.0, 1.0];
        let w = [1.0; 6];
        let tree = fit(&x, &t, &w, presort(&x), 20, 1);
        assert_eq!(tree.n_splits(), 1);
        assert_eq!(tree.predict(&[2.0]), -1.0);
        assert_eq!(tree.predict(&[3.5]), -1.0);
        assert_eq!(tree.predict(&[4.0]), 1.0);
    }

    #[test]
    fn respects_split_budget() {
        let n = 64;
        let x = Matrix::new(n, 1, (0..n).map(|i| i as f64).collect()).unwrap();
        let t: Vec<f64> = (0..n).map(|i| if (i / 2) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let tree = fit(&x, &t, &vec![1.0; n], presort(&x), 5, 1);
        assert_eq!(tree.n_splits(), 5);
    }
}
