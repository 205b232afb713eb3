//! Feature rankers: two filters, two wrappers and two embedded methods,
//! each mapping a dataset to a permutation of `1..=p`.

pub mod forest;
pub mod pearson;
pub mod relief;
pub mod rfe;
pub mod wrapper;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierKind, ClassifierSpec};
use crate::error::{Error, Result};
use crate::ingest::subsample;
use crate::model::{Dataset, RankingEnsemble, RankingVector};
use crate::params::{Hyperparameters, ParamReader};
use crate::seed;

pub use forest::rank_random_forest;
pub use pearson::rank_pearson;
pub use relief::rank_relief;
pub use rfe::rank_svm_rfe;
pub use wrapper::rank_wrapper;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RankerKind {
    Pearson,
    Relief,
    SvmWrapper,
    NnWrapper,
    SvmRfe,
    RandomForest,
}

impl RankerKind {
    pub const ALL: [RankerKind; 6] = [
        Self::Pearson,
        Self::Relief,
        Self::SvmWrapper,
        Self::NnWrapper,
        Self::SvmRfe,
        Self::RandomForest,
    ];
}

impl fmt::Display for RankerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// JSON form: `{"kind": "SvmRfe", "hyperparameters": {"chunk_fraction": 0.1}}`.
/// An optional `name` distinguishes two configurations of one kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankerSpec {
    pub kind: RankerKind,
    #[serde(default)]
    pub hyperparameters: Hyperparameters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedRanker {
    Pearson,
    Relief(relief::ReliefParams),
    Wrapper(wrapper::WrapperParams),
    SvmRfe(rfe::RfeParams),
    RandomForest(forest::ForestParams),
}

impl RankerSpec {
    pub fn new(kind: RankerKind) -> Self {
        Self {
            kind,
            hyperparameters: Hyperparameters::new(),
            name: None,
        }
    }

    pub fn with(mut self, name: &str, value: impl Into<serde_json::Value>) -> Self {
        self.hyperparameters.insert(name.to_string(), value.into());
        self
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.to_string())
    }

    pub fn resolve(&self) -> Result<ResolvedRanker> {
        let owner = self.kind.to_string();
        let mut r = ParamReader::new(&owner, &self.hyperparameters);
        let out = match self.kind {
            RankerKind::Pearson => ResolvedRanker::Pearson,
            RankerKind::Relief => ResolvedRanker::Relief(relief::ReliefParams {
                n_neighbors: r.usize("n_neighbors", 10, 1, 1_000_000)?,
                sample_size: r.usize("sample_size", 0, 0, usize::MAX)?,
            }),
            RankerKind::SvmWrapper | RankerKind::NnWrapper => {
                let kind = if self.kind == RankerKind::SvmWrapper {
                    ClassifierKind::SVM
                } else {
                    ClassifierKind::NN
                };
                let inner = ClassifierSpec {
                    kind,
                    hyperparameters: r.object("inner")?,
                };
                inner.resolve()?;
                ResolvedRanker::Wrapper(wrapper::WrapperParams {
                    inner,
                    inner_folds: r.usize("inner_folds", 3, 2, 1000)?,
                    max_rows: r.usize("max_rows", 0, 0, usize::MAX)?,
                    search_depth: r.usize("search_depth", 0, 0, usize::MAX)?,
                })
            }
            RankerKind::SvmRfe => ResolvedRanker::SvmRfe(rfe::RfeParams {
                c: r.f64("c", 1.0, 1e-9, 1e9)?,
                chunk_fraction: r.f64("chunk_fraction", 0.0, 0.0, 0.99)?,
                tol: r.f64("tol", 1e-3, 1e-12, 1.0)?,
                max_epochs: r.usize("max_epochs", 1000, 1, 10_000_000)?,
            }),
            RankerKind::RandomForest => ResolvedRanker::RandomForest(forest::ForestParams {
                n_trees: r.usize("n_trees", 200, 1, 1_000_000)?,
                mtry: r.usize("mtry", 0, 0, usize::MAX)?,
                max_depth: r.usize("max_depth", 0, 0, usize::MAX)?,
                min_leaf: r.usize("min_leaf", 1, 1, usize::MAX)?,
            }),
        };
        r.finish()?;
        Ok(out)
    }
}

/// Runs one ranker on `d`. Deterministic rankers ignore `seed`.
pub fn rank(spec: &RankerSpec, d: &Dataset, seed: u64) -> Result<RankingVector> {
    let resolved = spec.resolve()?;
    let ranking = match &resolved {
        ResolvedRanker::Pearson => rank_pearson(d)?,
        ResolvedRanker::Relief(p) => {
            let cases = d.n_cases();
            if cases < 2 || d.n_instances() - cases < 2 {
                return Err(Error::DegenerateSample(
                    "Relief needs at least 2 instances of each class".into(),
                ));
            }
            rank_relief(d, p, seed)?
        }
        ResolvedRanker::Wrapper(p) => rank_wrapper(d, p, seed)?,
        ResolvedRanker::SvmRfe(p) => rank_svm_rfe(d, p, seed)?,
        ResolvedRanker::RandomForest(p) => rank_random_forest(d, p, seed)?,
    };
    debug_assert!(ranking.is_permutation());
    Ok(ranking)
}

/// `runs` rankings, each on a `fraction` subsample drawn with a seed derived
/// from `seed` and the run index. Runs execute in parallel; results are kept
/// in run order.
pub fn run_ensemble(spec: &RankerSpec, d: &Dataset, runs: usize, fraction: f64, seed: u64) -> Result<RankingEnsemble> {
    if runs < 2 {
        return Err(Error::Config(format!("an ensemble needs at least 2 runs, got {runs}")));
    }
    spec.resolve()?;
    let label = spec.label();
    let seeds: Vec<u64> = (0..runs)
        .map(|i| seed::derive_indexed(seed, &label, i as u64))
        .collect();
    let rankings = seeds
        .par_iter()
        .map(|&s| {
            let sample = subsample(d, fraction, seed::derive(s, &["subsample"]))?;
            rank(spec, &sample, seed::derive(s, &["rank"]))
        })
        .collect::<Result<Vec<_>>>()?;
    RankingEnsemble::new(label, rankings, seeds)
}
