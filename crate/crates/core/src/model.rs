//! Domain types: datasets, rankings, top-k masks and ranking ensembles.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { data, rows, cols })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            data: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} values, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            data,
            rows: rows.len(),
            cols,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            data,
            rows: idx.len(),
            cols: self.cols,
        }
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for i in 0..self.rows {
            let r = self.row(i);
            data.extend(idx.iter().map(|&j| r[j]));
        }
        Matrix {
            data,
            rows: self.rows,
            cols: idx.len(),
        }
    }
}

/// Binary-labelled tabular data: `M` instances of `p` named numeric features.
///
/// Labels are 1 for cases and 0 for controls. Construction enforces finite
/// values, unique non-empty names and the presence of both classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    features: Matrix,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, features: Matrix, labels: Vec<u8>) -> Result<Self> {
        if feature_names.len() != features.cols() {
            return Err(Error::Shape(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.cols()
            )));
        }
        if labels.len() != features.rows() {
            return Err(Error::Shape(format!(
                "{} labels for {} rows",
                labels.len(),
                features.rows()
            )));
        }
        if features.cols() == 0 {
            return Err(Error::InvalidData("dataset has no features".into()));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if name.is_empty() {
                return Err(Error::InvalidData("empty feature name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidData(format!("duplicate feature name '{name}'")));
            }
        }
        if let Some(pos) = features.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite value at row {}, column {}",
                pos / features.cols(),
                pos % features.cols()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidData(format!("label {bad} is not binary")));
        }
        let cases = labels.iter().filter(|&&l| l == 1).count();
        if cases == 0 || cases == labels.len() {
            return Err(Error::InvalidData(
                "both classes must be present".to_string(),
            ));
        }
        Ok(Self {
            feature_names,
            features,
            labels,
        })
    }

    pub fn n_instances(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn n_cases(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn select_rows(&self, idx: &[usize]) -> Result<Dataset> {
        Dataset::new(
            self.feature_names.clone(),
            self.features.select_rows(idx),
            idx.iter().map(|&i| self.labels[i]).collect(),
        )
    }

    pub fn select_columns(&self, idx: &[usize]) -> Result<Dataset> {
        if let Some(&j) = idx.iter().find(|&&j| j >= self.n_features()) {
            return Err(Error::Bounds {
                what: "feature index",
                value: j,
                min: 0,
                max: self.n_features() - 1,
            });
        }
        Dataset::new(
            idx.iter().map(|&j| self.feature_names[j].clone()).collect(),
            self.features.select_columns(idx),
            self.labels.clone(),
        )
    }

    /// Replaces the feature matrix, keeping names and labels.
    pub fn with_features(&self, features: Matrix) -> Result<Dataset> {
        Dataset::new(self.feature_names.clone(), features, self.labels.clone())
    }
}

/// Rank assigned to each feature; rank 1 is the most relevant.
///
/// Raw ranker output is a permutation of `1..=p`. Aggregated rankings may
/// hold fractional or tied values in `[1, p]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RankingVector(Vec<f64>);

impl RankingVector {
    /// Accepts any finite ranks within `[1, p]`.
    pub fn from_ranks(ranks: Vec<f64>) -> Result<Self> {
        let p = ranks.len() as f64;
        if ranks.is_empty() {
            return Err(Error::Shape("empty ranking".into()));
        }
        if let Some(r) = ranks.iter().find(|r| !(r.is_finite() && **r >= 1.0 && **r <= p)) {
            return Err(Error::Domain(format!("rank {r} outside [1, {p}]")));
        }
        Ok(Self(ranks))
    }

    /// Accepts only a permutation of `1..=p`.
    pub fn from_permutation(ranks: Vec<usize>) -> Result<Self> {
        let p = ranks.len();
        let mut seen = vec![false; p];
        for &r in &ranks {
            if r == 0 || r > p || seen[r - 1] {
                return Err(Error::Domain(format!(
                    "ranks are not a permutation of 1..={p}"
                )));
            }
            seen[r - 1] = true;
        }
        Self::from_ranks(ranks.into_iter().map(|r| r as f64).collect())
    }

    /// Builds a ranking from an ordering of feature indices, best first.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        let mut ranks = vec![0usize; order.len()];
        for (pos, &j) in order.iter().enumerate() {
            if j >= order.len() {
                return Err(Error::Shape(format!("feature index {j} out of range")));
            }
            ranks[j] = pos + 1;
        }
        Self::from_permutation(ranks)
    }

    /// Ranks features by descending score; equal scores go to the lower index.
    pub fn from_scores_desc(scores: &[f64]) -> Result<Self> {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        Self::from_order(&order)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ranks(&self) -> &[f64] {
        &self.0
    }

    pub fn is_permutation(&self) -> bool {
        let p = self.0.len();
        let mut seen = vec![false; p];
        self.0.iter().all(|&r| {
            let i = r as usize;
            if r.fract() != 0.0 || i == 0 || i > p || seen[i - 1] {
                return false;
            }
            seen[i - 1] = true;
            true
        })
    }

    /// Feature indices sorted best first (rank ascending, index ascending on ties).
    pub fn order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.0.len()).collect();
        order.sort_by(|&a, &b| self.0[a].total_cmp(&self.0[b]).then(a.cmp(&b)));
        order
    }
}

/// Binary inclusion vector with exactly `k` selected features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopKMask {
    included: Vec<bool>,
    k: usize,
}

impl TopKMask {
    pub fn from_flags(included: Vec<bool>) -> Result<Self> {
        let k = included.iter().filter(|&&b| b).count();
        Ok(Self { included, k })
    }

    pub fn from_indices(p: usize, idx: &[usize]) -> Result<Self> {
        let mut included = vec![false; p];
        for &j in idx {
            if j >= p {
                return Err(Error::Bounds {
                    what: "feature index",
                    value: j,
                    min: 0,
                    max: p.saturating_sub(1),
                });
            }
            included[j] = true;
        }
        Self::from_flags(included)
    }

    pub fn all(p: usize) -> Self {
        Self {
            included: vec![true; p],
            k: p,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.included.len()
    }

    pub fn is_empty(&self) -> bool {
        self.included.is_empty()
    }

    pub fn flags(&self) -> &[bool] {
        &self.included
    }

    pub fn indices(&self) -> Vec<usize> {
        self.included
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| b.then_some(j))
            .collect()
    }

    pub fn intersection(&self, other: &TopKMask) -> Result<TopKMask> {
        check_same_len(self.len(), other.len())?;
        Self::from_flags(
            self.included
                .iter()
                .zip(&other.included)
                .map(|(a, b)| *a && *b)
                .collect(),
        )
    }

    pub fn is_subset_of(&self, other: &TopKMask) -> bool {
        self.len() == other.len() && self.included.iter().zip(&other.included).all(|(a, b)| !a || *b)
    }
}

pub(crate) fn check_same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("length {a} vs {b}")));
    }
    Ok(())
}

/// Rankings from `K` repeated runs of one ranker over the same features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEnsemble {
    #[serde(rename = "ranker")]
    ranker_name: String,
    seeds: Vec<u64>,
    rankings: Vec<RankingVector>,
}

impl RankingEnsemble {
    pub fn new(ranker_name: impl Into<String>, rankings: Vec<RankingVector>, seeds: Vec<u64>) -> Result<Self> {
        let e = Self {
            ranker_name: ranker_name.into(),
            seeds,
            rankings,
        };
        e.validate()?;
        Ok(e)
    }

    /// Checks invariants; used after deserialization too.
    pub fn validate(&self) -> Result<()> {
        if self.rankings.len() < 2 {
            return Err(Error::Domain(format!(
                "ensemble '{}' needs at least 2 rankings, got {}",
                self.ranker_name,
                self.rankings.len()
            )));
        }
        if self.seeds.len() != self.rankings.len() {
            return Err(Error::Shape(format!(
                "{} seeds for {} rankings",
                self.seeds.len(),
                self.rankings.len()
            )));
        }
        let p = self.rankings[0].len();
        for r in &self.rankings {
            check_same_len(p, r.len())?;
            RankingVector::from_ranks(r.ranks().to_vec())?;
        }
        Ok(())
    }

    pub fn ranker_name(&self) -> &str {
        &self.ranker_name
    }

    pub fn rankings(&self) -> &[RankingVector] {
        &self.rankings
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn runs(&self) -> usize {
        self.rankings.len()
    }

    pub fn n_features(&self) -> usize {
        self.rankings[0].len()
    }
}

/// Selects the `k` best-ranked features (`s_i = 1` iff feature `i` is among
/// the `k` smallest ranks). Ties at the boundary go to the lower index.
pub fn to_top_k(r: &RankingVector, k: usize) -> Result<TopKMask> {
    let p = r.len();
    if k == 0 || k > p {
        return Err(Error::Bounds {
            what: "k",
            value: k,
            min: 1,
            max: p,
        });
    }
    let mut included = vec![false; p];
    for &j in r.order().iter().take(k) {
        included[j] = true;
    }
    Ok(TopKMask { included, k })
}

/// Per-feature median rank across the runs; the result is not re-ranked.
pub fn aggregate_median(e: &RankingEnsemble) -> RankingVector {
    let p = e.n_features();
    let mut column = Vec::with_capacity(e.runs());
    let ranks = (0..p)
        .map(|j| {
            column.clear();
            column.extend(e.rankings().iter().map(|r| r.ranks()[j]));
            median(&mut column)
        })
        .collect();
    RankingVector(ranks)
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
