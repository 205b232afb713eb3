//! End-to-end study: ranking ensembles, median aggregation, AUC-vs-k
//! curves, best-subset tables, stability tables and the MDS map.

mod report;

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{cross_validate, evaluate_subset, ClassifierSpec, EvalResult};
use crate::error::{Error, Result};
use crate::mds::{self, Embedding};
use crate::model::{aggregate_median, to_top_k, Dataset, RankingEnsemble, RankingVector, TopKMask};
use crate::rankers::{run_ensemble, RankerSpec};
use crate::seed;
use crate::stability::{ensemble_stability, jaccard_profile, JaccardProfile, Metric};

pub use report::{emit_report, Manifest, ManifestEntry};

pub const DEFAULT_JACCARD_GRID: [usize; 10] = [10, 20, 30, 35, 40, 50, 60, 70, 80, 90];

fn default_runs() -> usize {
    7
}
fn default_fraction() -> f64 {
    0.7
}
fn default_folds() -> usize {
    5
}
fn default_caps() -> Vec<usize> {
    vec![40, 55, 70]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub rankers: Vec<RankerSpec>,
    pub classifiers: Vec<ClassifierSpec>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_fraction")]
    pub fraction: f64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Subset sizes for the AUC curves; `None` means `1..=p`.
    #[serde(default)]
    pub curve_k: Option<Vec<usize>>,
    /// Subset sizes for the Jaccard table; `None` means the default grid
    /// (entries above `p` dropped) plus `p`.
    #[serde(default)]
    pub jaccard_k: Option<Vec<usize>>,
    #[serde(default = "default_caps")]
    pub best_subset_caps: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(rankers: Vec<RankerSpec>, classifiers: Vec<ClassifierSpec>) -> Self {
        Self {
            rankers,
            classifiers,
            runs: default_runs(),
            fraction: default_fraction(),
            folds: default_folds(),
            curve_k: None,
            jaccard_k: None,
            best_subset_caps: default_caps(),
            seed: 0,
        }
    }

    pub fn curve_grid(&self, p: usize) -> Vec<usize> {
        self.curve_k.clone().unwrap_or_else(|| (1..=p).collect())
    }

    pub fn jaccard_grid(&self, p: usize) -> Vec<usize> {
        self.jaccard_k.clone().unwrap_or_else(|| {
            let mut g: Vec<usize> = DEFAULT_JACCARD_GRID.iter().copied().filter(|&k| k < p).collect();
            g.push(p);
            g
        })
    }

    /// Checks everything that can be checked without running a stage.
    pub fn validate(&self, p: usize) -> Result<()> {
        if self.rankers.is_empty() || self.classifiers.is_empty() {
            return Err(Error::Config("at least one ranker and one classifier are required".into()));
        }
        if self.runs < 2 {
            return Err(Error::Config(format!("runs must be at least 2, got {}", self.runs)));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::Config(format!("fraction {} not in (0, 1]", self.fraction)));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        for (what, grid) in [("curve_k", self.curve_grid(p)), ("jaccard_k", self.jaccard_grid(p))] {
            if grid.is_empty() {
                return Err(Error::Config(format!("{what} grid is empty")));
            }
            if let Some(&k) = grid.iter().find(|&&k| k == 0 || k > p) {
                return Err(Error::Config(format!("{what} entry {k} outside [1, {p}]")));
            }
        }
        if self.best_subset_caps.contains(&0) {
            return Err(Error::Config("best-subset caps must be positive".into()));
        }
        let mut names = Vec::new();
        for r in &self.rankers {
            r.resolve()?;
            names.push(r.label());
        }
        unique("ranker", &names)?;
        let mut names = Vec::new();
        for c in &self.classifiers {
            c.resolve()?;
            names.push(c.label());
        }
        unique("classifier", &names)
    }
}

fn unique(what: &str, names: &[String]) -> Result<()> {
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::Config(format!("duplicate {what} label '{n}'")));
        }
    }
    Ok(())
}

/// CV seed for a classifier: shared by its baseline, every curve point and
/// every compared feature set, so fold assignments are paired.
pub fn evaluation_seed(master: u64, classifier: &ClassifierSpec) -> u64 {
    seed::derive(master, &["eval", &classifier.label()])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub instances: usize,
    pub features: usize,
    pub cases: usize,
    pub feature_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub classifier: String,
    pub result: EvalResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedRanking {
    pub ranker: String,
    pub ranking: RankingVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub auc: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveResult {
    pub ranker: String,
    pub classifier: String,
    pub points: Vec<CurvePoint>,
    pub baseline_auc: f64,
}

impl CurveResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,auc,accuracy,baseline_auc\n");
        for p in &self.points {
            s.push_str(&format!("{},{},{},{}\n", p.k, p.auc, p.accuracy, self.baseline_auc));
        }
        s
    }

    pub fn best(&self) -> Option<&CurvePoint> {
        self.points.iter().fold(None, |acc: Option<&CurvePoint>, p| match acc {
            Some(b) if b.auc >= p.auc => Some(b),
            _ => Some(p),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSubset {
    pub k: usize,
    pub ranker: String,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSubsetRow {
    pub classifier: String,
    pub cap: usize,
    pub best: Vec<BestSubset>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSubsetTable {
    pub rows: Vec<BestSubsetRow>,
}

impl BestSubsetTable {
    /// Top three `(k, ranker, auc)` per classifier and cap among curve
    /// points with `k <= cap`. Ties keep curve order (ranker, then k).
    pub fn from_curves(curves: &[CurveResult], classifiers: &[String], caps: &[usize]) -> Self {
        let mut rows = Vec::new();
        for c in classifiers {
            for &cap in caps {
                let mut cands: Vec<BestSubset> = curves
                    .iter()
                    .filter(|cr| &cr.classifier == c)
                    .flat_map(|cr| {
                        cr.points.iter().filter(|p| p.k <= cap).map(|p| BestSubset {
                            k: p.k,
                            ranker: cr.ranker.clone(),
                            auc: p.auc,
                        })
                    })
                    .collect();
                cands.sort_by(|a, b| b.auc.total_cmp(&a.auc));
                cands.truncate(3);
                rows.push(BestSubsetRow {
                    classifier: c.clone(),
                    cap,
                    best: cands,
                });
            }
        }
        Self { rows }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("classifier,cap,position,k,ranker,auc\n");
        for r in &self.rows {
            for (i, b) in r.best.iter().enumerate() {
                s.push_str(&format!("{},{},{},{},{},{}\n", r.classifier, r.cap, i + 1, b.k, b.ranker, b.auc));
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankerStability {
    pub ranker: String,
    pub spearman: f64,
    pub jaccard: JaccardProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdsResult {
    pub embedding: Embedding,
    pub dispersion: BTreeMap<String, f64>,
}

/// Everything a pipeline run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub config: PipelineConfig,
    pub dataset: DatasetSummary,
    pub ensembles: Vec<RankingEnsemble>,
    pub aggregated: Vec<AggregatedRanking>,
    pub stability: Vec<RankerStability>,
    /// Absent when there are fewer than three ranking outcomes to embed.
    pub mds: Option<MdsResult>,
    pub baselines: Vec<Baseline>,
    pub curves: Vec<CurveResult>,
    pub best_subsets: BestSubsetTable,
    pub evaluations: usize,
}

impl StabilityReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn stability_csv(&self) -> String {
        let mut s = String::from("ranker,spearman,jaccard_average\n");
        for r in &self.stability {
            s.push_str(&format!("{},{},{}\n", r.ranker, r.spearman, r.jaccard.average));
        }
        s
    }

    pub fn jaccard_csv(&self) -> String {
        let mut s = String::from("ranker,k,value\n");
        for r in &self.stability {
            for p in &r.jaccard.points {
                s.push_str(&format!("{},{},{}\n", r.ranker, p.k, p.value));
            }
        }
        s
    }

    pub fn baseline_csv(&self) -> String {
        let mut s = String::from("classifier,auc,accuracy\n");
        for b in &self.baselines {
            s.push_str(&format!("{},{},{}\n", b.classifier, b.result.auc, b.result.accuracy));
        }
        s
    }
}

/// Results of the stages that finished before a failure.
#[derive(Debug, Serialize)]
struct Partial<'a> {
    failed_stage: String,
    error: String,
    ensembles: &'a [RankingEnsemble],
    stability: &'a [RankerStability],
    mds: Option<&'a MdsResult>,
    baselines: &'a [Baseline],
}

pub const PARTIAL_FILE: &str = "partial_report.json";

/// Runs the full study on `d`. On a stage failure the error names the
/// stage, and if `flush_dir` is given the completed stages are written there
/// as `partial_report.json`.
pub fn run_pipeline(cfg: &PipelineConfig, d: &Dataset, flush_dir: Option<&Path>) -> Result<StabilityReport> {
    let p = d.n_features();
    cfg.validate(p)?;
    let curve_k = cfg.curve_grid(p);
    let jaccard_k = cfg.jaccard_grid(p);

    let mut ensembles = Vec::new();
    let mut stability = Vec::new();
    let mut mds_result = None;
    let mut baselines = Vec::new();
    let fail = |stage: String,
                e: Error,
                ensembles: &[RankingEnsemble],
                stability: &[RankerStability],
                mds_result: Option<&MdsResult>,
                baselines: &[Baseline]|
     -> Error {
        if let Some(dir) = flush_dir {
            let partial = Partial {
                failed_stage: stage.clone(),
                error: e.to_string(),
                ensembles,
                stability,
                mds: mds_result,
                baselines,
            };
            let written = std::fs::create_dir_all(dir)
                .map_err(|io| Error::io(dir, io))
                .and_then(|_| Ok(serde_json::to_string_pretty(&partial)?))
                .and_then(|json| {
                    let path = dir.join(PARTIAL_FILE);
                    std::fs::write(&path, json + "\n").map_err(|io| Error::io(path, io))
                });
            if let Err(w) = written {
                log::error!("could not flush partial results: {w}");
            }
        }
        Error::Stage {
            stage,
            source: Box::new(e),
        }
    };

    let ensemble_seed = seed::derive(cfg.seed, &["ensemble"]);
    for r in &cfg.rankers {
        log::info!("ranking with {} ({} runs)", r.label(), cfg.runs);
        match run_ensemble(r, d, cfg.runs, cfg.fraction, ensemble_seed) {
            Ok(e) => ensembles.push(e),
            Err(e) => return Err(fail(format!("ensemble:{}", r.label()), e, &ensembles, &stability, None, &baselines)),
        }
    }
    let aggregated: Vec<AggregatedRanking> = ensembles
        .iter()
        .map(|e| AggregatedRanking {
            ranker: e.ranker_name().to_string(),
            ranking: aggregate_median(e),
        })
        .collect();

    for e in &ensembles {
        let s = ensemble_stability(e, Metric::Spearman, None).and_then(|sp| {
            Ok(RankerStability {
                ranker: e.ranker_name().to_string(),
                spearman: sp.value,
                jaccard: jaccard_profile(e, &jaccard_k)?,
            })
        });
        match s {
            Ok(s) => stability.push(s),
            Err(err) => return Err(fail("stability".into(), err, &ensembles, &stability, None, &baselines)),
        }
    }

    let points: usize = ensembles.iter().map(|e| e.runs()).sum();
    if points >= 3 {
        let embedded = mds::rank_dissimilarity(&ensembles).and_then(|dm| mds::embed(&dm, seed::derive(cfg.seed, &["mds"])));
        match embedded {
            Ok(embedding) => {
                let dispersion = mds::dispersion(&embedding);
                mds_result = Some(MdsResult { embedding, dispersion });
            }
            Err(err) => return Err(fail("mds".into(), err, &ensembles, &stability, None, &baselines)),
        }
    } else {
        log::warn!("only {points} ranking outcomes; MDS skipped");
    }

    log::info!("baseline evaluation of {} classifiers", cfg.classifiers.len());
    let base: Result<Vec<Baseline>> = cfg
        .classifiers
        .par_iter()
        .map(|c| {
            Ok(Baseline {
                classifier: c.label(),
                result: cross_validate(c, d, cfg.folds, evaluation_seed(cfg.seed, c))?,
            })
        })
        .collect();
    match base {
        Ok(b) => baselines = b,
        Err(err) => return Err(fail("baseline".into(), err, &ensembles, &stability, mds_result.as_ref(), &baselines)),
    }

    // (ranker, classifier, k) cells, evaluated in parallel and kept in grid order
    let (nr, nc, nk) = (aggregated.len(), cfg.classifiers.len(), curve_k.len());
    log::info!("evaluating {} curve points", nr * nc * nk);
    let masks: Vec<Vec<TopKMask>> = aggregated
        .iter()
        .map(|a| curve_k.iter().map(|&k| to_top_k(&a.ranking, k)).collect::<Result<_>>())
        .collect::<Result<_>>()
        .map_err(|err| fail("curves".into(), err, &ensembles, &stability, mds_result.as_ref(), &baselines))?;
    let cells: Result<Vec<EvalResult>> = (0..nr * nc * nk)
        .into_par_iter()
        .map(|cell| {
            let (r, rest) = (cell / (nc * nk), cell % (nc * nk));
            let (c, ki) = (rest / nk, rest % nk);
            let spec = &cfg.classifiers[c];
            evaluate_subset(spec, d, &masks[r][ki], cfg.folds, evaluation_seed(cfg.seed, spec))
        })
        .collect();
    let cells = cells.map_err(|err| fail("curves".into(), err, &ensembles, &stability, mds_result.as_ref(), &baselines))?;
    let mut curves = Vec::with_capacity(nr * nc);
    for (r, a) in aggregated.iter().enumerate() {
        for (c, b) in baselines.iter().enumerate() {
            let points = (0..nk)
                .map(|ki| {
                    let res = &cells[(r * nc + c) * nk + ki];
                    CurvePoint {
                        k: curve_k[ki],
                        auc: res.auc,
                        accuracy: res.accuracy,
                    }
                })
                .collect();
            curves.push(CurveResult {
                ranker: a.ranker.clone(),
                classifier: b.classifier.clone(),
                points,
                baseline_auc: b.result.auc,
            });
        }
    }
    let classifier_names: Vec<String> = cfg.classifiers.iter().map(|c| c.label()).collect();
    let best_subsets = BestSubsetTable::from_curves(&curves, &classifier_names, &cfg.best_subset_caps);

    Ok(StabilityReport {
        config: cfg.clone(),
        dataset: DatasetSummary {
            instances: d.n_instances(),
            features: p,
            cases: d.n_cases(),
            feature_names: d.feature_names().to_vec(),
        },
        ensembles,
        aggregated,
        stability,
        mds: mds_result,
        baselines,
        curves,
        best_subsets,
        evaluations: nr * nc * nk + nc,
    })
}

/// A named feature subset for [`compare_feature_sets`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSet {
    pub name: String,
    pub mask: TopKMask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub set: String,
    pub k: usize,
    pub classifier: String,
    pub auc: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub rows: Vec<CompareRow>,
}

impl CompareTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("set,k,classifier,auc,accuracy\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{},{}\n", r.set, r.k, r.classifier, r.auc, r.accuracy));
        }
        s
    }
}

pub const FULL_SET: &str = "full";

/// Evaluates every (set, classifier) pair, preceded by the full-feature
/// baseline. Each requested `(a, b)` pair adds the intersection of the named
/// sets as `a&b`.
pub fn compare_feature_sets(
    d: &Dataset,
    sets: &[NamedSet],
    intersections: &[(String, String)],
    classifiers: &[ClassifierSpec],
    folds: usize,
    seed: u64,
) -> Result<CompareTable> {
    if classifiers.is_empty() {
        return Err(Error::Config("no classifiers to compare with".into()));
    }
    let mut all = vec![NamedSet {
        name: FULL_SET.into(),
        mask: TopKMask::all(d.n_features()),
    }];
    for s in sets {
        if s.mask.k() == 0 {
            return Err(Error::Config(format!("feature set '{}' is empty", s.name)));
        }
        if s.mask.len() != d.n_features() {
            return Err(Error::Shape(format!(
                "feature set '{}' covers {} features, dataset has {}",
                s.name,
                s.mask.len(),
                d.n_features()
            )));
        }
        all.push(s.clone());
    }
    for (a, b) in intersections {
        let find = |n: &str| {
            sets.iter()
                .find(|s| s.name == n)
                .ok_or_else(|| Error::Config(format!("unknown feature set '{n}' in intersection")))
        };
        let mask = find(a)?.mask.intersection(&find(b)?.mask)?;
        if mask.k() == 0 {
            return Err(Error::Domain(format!("intersection of '{a}' and '{b}' is empty")));
        }
        all.push(NamedSet {
            name: format!("{a}&{b}"),
            mask,
        });
    }
    for c in classifiers {
        c.resolve()?;
    }
    let nc = classifiers.len();
    let rows = (0..all.len() * nc)
        .into_par_iter()
        .map(|cell| {
            let (set, c) = (&all[cell / nc], &classifiers[cell % nc]);
            let r = evaluate_subset(c, d, &set.mask, folds, evaluation_seed(seed, c))?;
            Ok(CompareRow {
                set: set.name.clone(),
                k: set.mask.k(),
                classifier: c.label(),
                auc: r.auc,
                accuracy: r.accuracy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompareTable { rows })
}
