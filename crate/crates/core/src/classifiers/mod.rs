//! The five risk-prediction models behind one train/score interface, plus
//! ROC-AUC and stratified cross-validation.

pub mod boost;
pub mod knn;
pub mod logistic;
pub mod metrics;
pub mod mlp;
pub mod svm;
pub mod tree;

use std::fmt;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Standardizer;
use crate::model::{Dataset, Matrix, TopKMask};
use crate::params::{Hyperparameters, ParamReader};
use crate::seed;

pub use metrics::{accuracy, auc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    LR,
    KNN,
    SVM,
    BT,
    NN,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [Self::LR, Self::KNN, Self::SVM, Self::BT, Self::NN];
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::LR => "LR",
            Self::KNN => "KNN",
            Self::SVM => "SVM",
            Self::BT => "BT",
            Self::NN => "NN",
        };
        f.write_str(s)
    }
}

/// A classifier kind with optional hyperparameter overrides.
///
/// JSON form: `{"kind": "SVM", "hyperparameters": {"c": 2.0}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    #[serde(default)]
    pub hyperparameters: Hyperparameters,
}

/// Hyperparameters resolved against the per-kind defaults.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolved {
    LR(logistic::LogisticParams),
    KNN { k: usize },
    SVM(svm::SvmParams),
    BT(boost::BoostParams),
    NN {
        mlp: mlp::MlpParams,
        validation_fraction: f64,
        repetitions: usize,
        test_fraction: f64,
    },
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        Self {
            kind,
            hyperparameters: Hyperparameters::new(),
        }
    }

    pub fn with(mut self, name: &str, value: impl Into<serde_json::Value>) -> Self {
        self.hyperparameters.insert(name.to_string(), value.into());
        self
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let owner = self.kind.to_string();
        let mut r = ParamReader::new(&owner, &self.hyperparameters);
        let out = match self.kind {
            ClassifierKind::LR => Resolved::LR(logistic::LogisticParams {
                max_iter: r.usize("max_iter", 100, 1, 100_000)?,
                tol: r.f64("tol", 1e-6, 1e-14, 1.0)?,
                l2: r.f64("l2", 0.0, 0.0, 1e6)?,
            }),
            ClassifierKind::KNN => Resolved::KNN {
                k: r.usize("k", 47, 1, 1_000_000)?,
            },
            ClassifierKind::SVM => Resolved::SVM(svm::SvmParams {
                c: r.f64("c", 1.0, 1e-9, 1e9)?,
                gamma: r.opt_f64("gamma", 1e-12, 1e12)?,
                tol: r.f64("tol", 1e-3, 1e-9, 1.0)?,
                max_iter: r.usize("max_iter", 1_000_000, 1, usize::MAX)?,
            }),
            ClassifierKind::BT => Resolved::BT(boost::BoostParams {
                rounds: r.usize("rounds", 100, 1, 100_000)?,
                learn_rate: r.f64("learn_rate", 0.1, 1e-6, 1.0)?,
                max_splits: r.usize("max_splits", 20, 1, 100_000)?,
                min_leaf: r.usize("min_leaf", 1, 1, 1_000_000)?,
            }),
            ClassifierKind::NN => {
                let optimizer = match r.string("optimizer", "scg", &["scg", "momentum"])?.as_str() {
                    "momentum" => mlp::Optimizer::Momentum,
                    _ => mlp::Optimizer::Scg,
                };
                Resolved::NN {
                    mlp: mlp::MlpParams {
                        hidden: r.usize("hidden", 4, 1, 10_000)?,
                        epochs: r.usize("epochs", 100, 1, 1_000_000)?,
                        optimizer,
                        learning_rate: r.f64("learning_rate", 0.5, 1e-9, 100.0)?,
                        momentum: r.f64("momentum", 0.9, 0.0, 0.999_999)?,
                        max_fail: r.usize("max_fail", 10, 1, 1_000_000)?,
                    },
                    validation_fraction: r.f64("validation_fraction", 0.25, 0.0, 0.9)?,
                    repetitions: r.usize("repetitions", 3, 1, 1000)?,
                    test_fraction: r.f64("test_fraction", 0.2, 0.01, 0.9)?,
                }
            }
        };
        r.finish()?;
        Ok(out)
    }

    /// Short label used in reports and file names.
    pub fn label(&self) -> String {
        self.kind.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Fitted {
    LR(logistic::LogisticModel),
    KNN(knn::KnnModel),
    SVM(svm::SvmModel),
    BT(boost::BoostModel),
    NN(mlp::MlpModel),
}

/// A fitted model; immutable and deterministic to score.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    pub standardizer: Option<Standardizer>,
    pub fitted: Fitted,
    /// False when the optimizer hit its iteration cap.
    pub converged: bool,
    n_features: usize,
}

impl TrainedModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Score at which a row is predicted to be a case.
    pub fn threshold(&self) -> f64 {
        match self.fitted {
            Fitted::LR(_) | Fitted::NN(_) | Fitted::KNN(_) => 0.5,
            Fitted::SVM(_) | Fitted::BT(_) => 0.0,
        }
    }
}

pub fn train(spec: &ClassifierSpec, d: &Dataset, seed: u64) -> Result<TrainedModel> {
    let resolved = spec.resolve()?;
    let labels = d.labels();
    if d.n_cases() == 0 || d.n_cases() == d.n_instances() {
        return Err(Error::Training("training data holds a single class".into()));
    }
    let needs_scaling = !matches!(resolved, Resolved::BT(_));
    let standardizer = needs_scaling.then(|| Standardizer::fit(d.features()));
    let x = match &standardizer {
        Some(s) => s.transform(d.features())?,
        None => d.features().clone(),
    };
    let (fitted, converged) = match resolved {
        Resolved::LR(p) => {
            let m = logistic::fit(&x, labels, &p);
            let c = m.converged;
            (Fitted::LR(m), c)
        }
        Resolved::KNN { k } => (Fitted::KNN(knn::KnnModel::fit(&x, labels, k)), true),
        Resolved::SVM(p) => {
            let m = svm::SvmModel::fit(&x, labels, &p);
            let c = m.converged;
            (Fitted::SVM(m), c)
        }
        Resolved::BT(p) => (Fitted::BT(boost::BoostModel::fit(&x, labels, &p)), true),
        Resolved::NN {
            mlp: p,
            validation_fraction,
            ..
        } => {
            let m = fit_mlp(&x, labels, &p, validation_fraction, seed)?;
            let c = m.converged;
            (Fitted::NN(m), c)
        }
    };
    if !converged {
        log::warn!("{}: optimizer stopped at its iteration cap", spec.kind);
    }
    Ok(TrainedModel {
        spec: spec.clone(),
        standardizer,
        fitted,
        converged,
        n_features: d.n_features(),
    })
}

/// Holds out a stratified validation share for early stopping.
fn fit_mlp(x: &Matrix, labels: &[u8], p: &mlp::MlpParams, validation_fraction: f64, seed: u64) -> Result<mlp::MlpModel> {
    let init_seed = seed::derive(seed, &["nn-init"]);
    let split = (validation_fraction > 0.0)
        .then(|| stratified_holdout(labels, validation_fraction, seed::derive(seed, &["nn-validation"])))
        .flatten();
    match split {
        Some((tr, va)) => {
            let xt = x.select_rows(&tr);
            let yt: Vec<u8> = tr.iter().map(|&i| labels[i]).collect();
            let xv = x.select_rows(&va);
            let yv: Vec<u8> = va.iter().map(|&i| labels[i]).collect();
            Ok(mlp::MlpModel::fit(&xt, &yt, Some((&xv, &yv)), p, init_seed))
        }
        None => Ok(mlp::MlpModel::fit(x, labels, None, p, init_seed)),
    }
}

/// Splits indices into (train, held-out) with `fraction` of each class held
/// out. `None` when a class is too small to appear on both sides.
pub fn stratified_holdout(labels: &[u8], fraction: f64, seed: u64) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut rng = seed::rng(seed);
    let (mut train, mut held) = (Vec::new(), Vec::new());
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let h = ((fraction * idx.len() as f64).round() as usize).clamp(1, idx.len().saturating_sub(1).max(1));
        if idx.len() < 2 {
            return None;
        }
        held.extend_from_slice(&idx[..h]);
        train.extend_from_slice(&idx[h..]);
    }
    train.sort_unstable();
    held.sort_unstable();
    Some((train, held))
}

/// One class-1 score per row; larger means more case-like.
pub fn score(m: &TrainedModel, instances: &Matrix) -> Result<Vec<f64>> {
    if instances.rows() == 0 {
        return Ok(Vec::new());
    }
    if instances.cols() != m.n_features {
        return Err(Error::Shape(format!(
            "model trained on {} features, got {}",
            m.n_features,
            instances.cols()
        )));
    }
    let mut buf = vec![0.0; instances.cols()];
    let mut out = Vec::with_capacity(instances.rows());
    for i in 0..instances.rows() {
        let row = match &m.standardizer {
            Some(s) => {
                s.transform_row(instances.row(i), &mut buf);
                &buf[..]
            }
            None => instances.row(i),
        };
        out.push(match &m.fitted {
            Fitted::LR(f) => f.probability(row),
            Fitted::KNN(f) => f.score_row(row),
            Fitted::SVM(f) => f.decision(row),
            Fitted::BT(f) => f.decision(row),
            Fitted::NN(f) => f.probability(row),
        });
    }
    Ok(out)
}

/// Cross-validated performance of one classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    /// Mean of the fold AUCs, or the pooled out-of-fold AUC when some test
    /// fold lacks a class (e.g. leave-one-out).
    pub auc: f64,
    pub accuracy: f64,
    pub fold_auc: Vec<Option<f64>>,
    pub fold_accuracy: Vec<f64>,
    pub seed: u64,
    pub converged: bool,
}

/// Stratified fold id for each instance.
///
/// Each class is shuffled and dealt round-robin, so fold sizes differ by at
/// most one. Requires at least two instances per class and `M >= folds`.
pub fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    if labels.len() < folds {
        return Err(Error::Stratification(format!(
            "{} instances cannot fill {folds} folds",
            labels.len()
        )));
    }
    let mut rng = seed::rng(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < 2 {
            return Err(Error::Stratification(format!(
                "class {class} has {} instance(s)",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for i in idx {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

struct FoldOutcome {
    test: Vec<usize>,
    scores: Vec<f64>,
    auc: Option<f64>,
    accuracy: f64,
    converged: bool,
}

fn run_fold(spec: &ClassifierSpec, d: &Dataset, train_idx: &[usize], test_idx: &[usize], seed: u64) -> Result<FoldOutcome> {
    let train_set = d.select_rows(train_idx).map_err(|e| Error::Training(e.to_string()))?;
    let model = train(spec, &train_set, seed)?;
    let test_x = d.features().select_rows(test_idx);
    let test_y: Vec<u8> = test_idx.iter().map(|&i| d.labels()[i]).collect();
    let scores = score(&model, &test_x)?;
    let auc = metrics::auc(&scores, &test_y).ok();
    let accuracy = metrics::accuracy(&scores, &test_y, model.threshold())?;
    Ok(FoldOutcome {
        test: test_idx.to_vec(),
        scores,
        auc,
        accuracy,
        converged: model.converged,
    })
}

fn summarize(outcomes: Vec<FoldOutcome>, d: &Dataset, seed: u64) -> Result<EvalResult> {
    let fold_auc: Vec<Option<f64>> = outcomes.iter().map(|o| o.auc).collect();
    let auc = if fold_auc.iter().all(Option::is_some) {
        fold_auc.iter().flatten().sum::<f64>() / fold_auc.len() as f64
    } else {
        let mut pooled_s = Vec::new();
        let mut pooled_y = Vec::new();
        for o in &outcomes {
            pooled_s.extend_from_slice(&o.scores);
            pooled_y.extend(o.test.iter().map(|&i| d.labels()[i]));
        }
        metrics::auc(&pooled_s, &pooled_y)?
    };
    let fold_accuracy: Vec<f64> = outcomes.iter().map(|o| o.accuracy).collect();
    Ok(EvalResult {
        auc,
        accuracy: fold_accuracy.iter().sum::<f64>() / fold_accuracy.len() as f64,
        fold_auc,
        fold_accuracy,
        seed,
        converged: outcomes.iter().all(|o| o.converged),
    })
}

/// Stratified k-fold estimate; for NN, the mean of repeated stratified
/// hold-out splits instead.
pub fn cross_validate(spec: &ClassifierSpec, d: &Dataset, folds: usize, seed: u64) -> Result<EvalResult> {
    let resolved = spec.resolve()?;
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    let splits: Vec<(Vec<usize>, Vec<usize>)> = match resolved {
        Resolved::NN {
            repetitions,
            test_fraction,
            ..
        } => (0..repetitions)
            .map(|r| {
                stratified_holdout(d.labels(), test_fraction, seed::derive_indexed(seed, "nn-repetition", r as u64))
                    .ok_or_else(|| Error::Stratification("a class has fewer than 2 instances".into()))
            })
            .collect::<Result<_>>()?,
        _ => {
            let assignment = stratified_folds(d.labels(), folds, seed)?;
            (0..folds)
                .map(|f| {
                    let (test, train): (Vec<usize>, Vec<usize>) =
                        (0..d.n_instances()).partition(|&i| assignment[i] == f);
                    (train, test)
                })
                .collect()
        }
    };
    let outcomes: Vec<FoldOutcome> = splits
        .par_iter()
        .enumerate()
        .map(|(f, (tr, te))| run_fold(spec, d, tr, te, seed::derive_indexed(seed, "fold-model", f as u64)))
        .collect::<Result<_>>()?;
    summarize(outcomes, d, seed)
}

/// Cross-validation restricted to the masked feature columns.
pub fn evaluate_subset(spec: &ClassifierSpec, d: &Dataset, mask: &TopKMask, folds: usize, seed: u64) -> Result<EvalResult> {
    if mask.len() != d.n_features() {
        return Err(Error::Shape(format!(
            "mask over {} features, dataset has {}",
            mask.len(),
            d.n_features()
        )));
    }
    if mask.k() == 0 {
        return Err(Error::Bounds {
            what: "k",
            value: 0,
            min: 1,
            max: d.n_features(),
        });
    }
    let sub = d.select_columns(&mask.indices())?;
    cross_validate(spec, &sub, folds, seed)
}
