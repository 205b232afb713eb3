//! Scalar stability of repeated ranker outcomes: Spearman on full rankings,
//! Jaccard and Kuncheva on top-k subsets, reduced by averaging over all
//! unordered pairs of runs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_same_len, to_top_k, RankingEnsemble, RankingVector, TopKMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    Spearman,
    Jaccard,
    Kuncheva,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Spearman rank correlation `1 - 6 Σ d² / (p (p² - 1))`.
///
/// Applied to the given rank values as-is, including tied aggregated ranks.
pub fn spearman(r: &RankingVector, r2: &RankingVector) -> Result<f64> {
    check_same_len(r.len(), r2.len())?;
    let p = r.len();
    if p < 2 {
        return Err(Error::Domain("Spearman needs at least 2 features".into()));
    }
    let d2: f64 = r.ranks().iter().zip(r2.ranks()).map(|(a, b)| (a - b) * (a - b)).sum();
    let p = p as f64;
    Ok(1.0 - 6.0 * d2 / (p * (p * p - 1.0)))
}

/// Intersection over union of the selected sets; 1 when both are empty.
pub fn jaccard(s: &TopKMask, s2: &TopKMask) -> Result<f64> {
    check_same_len(s.len(), s2.len())?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (a, b) in s.flags().iter().zip(s2.flags()) {
        inter += usize::from(*a && *b);
        union += usize::from(*a || *b);
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

/// Chance-corrected overlap `(o - k²/p) / (k - k²/p)` for equal-size subsets.
pub fn kuncheva(s: &TopKMask, s2: &TopKMask) -> Result<f64> {
    check_same_len(s.len(), s2.len())?;
    if s.k() != s2.k() {
        return Err(Error::Domain(format!("Kuncheva needs equal k, got {} and {}", s.k(), s2.k())));
    }
    let (k, p) = (s.k(), s.len());
    if k == 0 || k >= p {
        return Err(Error::Domain(format!("Kuncheva undefined for k={k}, p={p}")));
    }
    let o = s.flags().iter().zip(s2.flags()).filter(|(a, b)| **a && **b).count() as f64;
    let (k, p) = (k as f64, p as f64);
    let expected = k * k / p;
    Ok((o - expected) / (k - expected))
}

/// Average-pairwise stability of an ensemble under one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityScore {
    pub metric: Metric,
    pub k: Option<usize>,
    pub value: f64,
    /// Symmetric `K x K` matrix of pairwise similarities; the diagonal holds
    /// each run's self-similarity.
    pub pairwise: Vec<Vec<f64>>,
}

/// Evaluates the metric on every unordered pair of runs and averages them.
pub fn ensemble_stability(e: &RankingEnsemble, metric: Metric, k: Option<usize>) -> Result<StabilityScore> {
    e.validate()?;
    let runs = e.runs();
    let masks: Option<Vec<TopKMask>> = match metric {
        Metric::Spearman => None,
        Metric::Jaccard | Metric::Kuncheva => {
            let k = k.ok_or_else(|| Error::Config(format!("{metric} stability needs k")))?;
            Some(e.rankings().iter().map(|r| to_top_k(r, k)).collect::<Result<_>>()?)
        }
    };
    let pair = |i: usize, j: usize| -> Result<f64> {
        match (&masks, metric) {
            (None, _) => spearman(&e.rankings()[i], &e.rankings()[j]),
            (Some(m), Metric::Jaccard) => jaccard(&m[i], &m[j]),
            (Some(m), _) => kuncheva(&m[i], &m[j]),
        }
    };
    let mut pairwise = vec![vec![0.0; runs]; runs];
    let mut sum = 0.0;
    for i in 0..runs {
        pairwise[i][i] = pair(i, i)?;
        for j in i + 1..runs {
            let v = pair(i, j)?;
            pairwise[i][j] = v;
            pairwise[j][i] = v;
            sum += v;
        }
    }
    let pairs = (runs * (runs - 1) / 2) as f64;
    Ok(StabilityScore {
        metric,
        k: if metric == Metric::Spearman { None } else { k },
        value: sum / pairs,
        pairwise,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub k: usize,
    pub value: f64,
}

/// Jaccard stability as a function of subset size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JaccardProfile {
    pub points: Vec<ProfilePoint>,
    /// Mean Jaccard stability over every k in `1..=p`.
    pub average: f64,
}

impl JaccardProfile {
    /// CSV with columns `k,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,value\n");
        for p in &self.points {
            s.push_str(&format!("{},{}\n", p.k, p.value));
        }
        s
    }
}

pub fn jaccard_profile(e: &RankingEnsemble, k_values: &[usize]) -> Result<JaccardProfile> {
    let p = e.n_features();
    let points = k_values
        .iter()
        .map(|&k| {
            Ok(ProfilePoint {
                k,
                value: ensemble_stability(e, Metric::Jaccard, Some(k))?.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for k in 1..=p {
        total += ensemble_stability(e, Metric::Jaccard, Some(k))?.value;
    }
    Ok(JaccardProfile {
        points,
        average: total / p as f64,
    })
}
