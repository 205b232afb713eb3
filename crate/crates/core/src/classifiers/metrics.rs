//! ROC-AUC via the Mann-Whitney statistic, and accuracy.

use crate::error::{Error, Result};
use crate::model::check_same_len;

/// Area under the ROC curve: P(case score > control score) + ½ P(tie).
///
/// Computed in O(n log n) from mid-ranks of the pooled scores.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    check_same_len(scores.len(), labels.len())?;
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::Domain(format!("score {s} is NaN")));
    }
    let n1 = labels.iter().filter(|&&l| l == 1).count();
    let n0 = labels.len() - n1;
    if n1 == 0 || n0 == 0 {
        return Err(Error::UndefinedAuc("scores need both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of 2x mid-ranks of the cases, kept integral.
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j share the mid-rank (i+1+j)/2
        let cases = order[i..j].iter().filter(|&&t| labels[t] == 1).count() as u128;
        twice_rank_sum += cases * (i as u128 + 1 + j as u128);
        i = j;
    }
    let (n1, n0) = (n1 as u128, n0 as u128);
    // 2U for the cases; 2U_case + 2U_control = 2 n1 n0 exactly.
    let twice_u = twice_rank_sum - n1 * (n1 + 1);
    let twice_total = 2 * n1 * n0;
    let total = twice_total as f64;
    // Divide the smaller half so that auc(s, y) + auc(s, 1 - y) == 1 exactly.
    Ok(if 2 * twice_u <= twice_total {
        twice_u as f64 / total
    } else {
        1.0 - (twice_total - twice_u) as f64 / total
    })
}

/// Fraction of rows whose thresholded score matches the label.
pub fn accuracy(scores: &[f64], labels: &[u8], threshold: f64) -> Result<f64> {
    check_same_len(scores.len(), labels.len())?;
    if scores.is_empty() {
        return Err(Error::Shape("no scores".into()));
    }
    let hits = scores
        .iter()
        .zip(labels)
        .filter(|(s, &l)| u8::from(**s >= threshold) == l)
        .count();
    Ok(hits as f64 / scores.len() as f64)
}
