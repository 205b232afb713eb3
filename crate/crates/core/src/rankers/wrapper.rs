//! Sequential forward selection guided by cross-validated AUC.
//!
//! Starting from the empty set, each step adds the candidate whose inclusion
//! gives the best inner-CV AUC of the wrapped classifier. Inclusion order is
//! the ranking.

use rayon::prelude::*;

use crate::classifiers::{cross_validate, stratified_holdout, ClassifierSpec};
use crate::error::Result;
use crate::model::{Dataset, RankingVector};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct WrapperParams {
    pub inner: ClassifierSpec,
    pub inner_folds: usize,
    /// Row cap for the inner evaluation (stratified subsample); 0 keeps all.
    pub max_rows: usize,
    /// Greedy steps to run; 0 runs to completion. Features left after the
    /// last step are ordered by their AUC in that step.
    pub search_depth: usize,
}

/// Inclusion order plus the AUC recorded when each feature was added.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub order: Vec<usize>,
    pub step_auc: Vec<f64>,
}

pub fn forward_selection(d: &Dataset, params: &WrapperParams, seed: u64) -> Result<ForwardTrace> {
    let reduced;
    let data = if params.max_rows > 0 && d.n_instances() > params.max_rows {
        let fraction = 1.0 - params.max_rows as f64 / d.n_instances() as f64;
        let keep = stratified_holdout(d.labels(), fraction, seed::derive(seed, &["wrapper-rows"]))
            .map(|(keep, _)| keep)
            .unwrap_or_else(|| (0..d.n_instances()).collect());
        reduced = d.select_rows(&keep)?;
        &reduced
    } else {
        d
    };
    let p = data.n_features();
    let depth = if params.search_depth == 0 {
        p
    } else {
        params.search_depth.min(p)
    };
    let cv_seed = seed::derive(seed, &["wrapper-cv"]);

    let mut selected: Vec<usize> = Vec::with_capacity(p);
    let mut step_auc = Vec::with_capacity(p);
    let mut remaining: Vec<usize> = (0..p).collect();
    let mut last_scores: Vec<f64> = Vec::new();
    while selected.len() < depth && !remaining.is_empty() {
        if remaining.len() == 1 {
            selected.push(remaining.pop().expect("one left"));
            step_auc.push(f64::NAN);
            last_scores.clear();
            break;
        }
        let scores: Vec<f64> = remaining
            .par_iter()
            .map(|&c| {
                let mut cols = selected.clone();
                cols.push(c);
                match data
                    .select_columns(&cols)
                    .and_then(|sub| cross_validate(&params.inner, &sub, params.inner_folds, cv_seed))
                {
                    Ok(r) => r.auc,
                    Err(e) => {
                        log::warn!("wrapper: candidate {c} failed ({e}); scored as AUC 0");
                        0.0
                    }
                }
            })
            .collect();
        // remaining is ascending, so the first maximum is the lowest index
        let mut best = 0;
        for (pos, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = pos;
            }
        }
        selected.push(remaining.remove(best));
        step_auc.push(scores[best]);
        last_scores = scores;
        last_scores.remove(best);
    }
    if !remaining.is_empty() {
        let mut rest: Vec<(usize, f64)> = remaining
            .iter()
            .enumerate()
            .map(|(pos, &j)| (j, last_scores.get(pos).copied().unwrap_or(0.0)))
            .collect();
        rest.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        selected.extend(rest.iter().map(|r| r.0));
    }
    Ok(ForwardTrace {
        order: selected,
        step_auc,
    })
}

pub fn rank_wrapper(d: &Dataset, params: &WrapperParams, seed: u64) -> Result<RankingVector> {
    RankingVector::from_order(&forward_selection(d, params, seed)?.order)
}
