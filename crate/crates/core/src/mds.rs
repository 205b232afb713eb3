//! Metric multidimensional scaling of ranking outcomes.
//!
//! Every run of every ranker becomes a point; dissimilarity is one minus
//! Spearman's coefficient. Points are embedded in 2D by stress majorization
//! (SMACOF) started from classical scaling.

use std::collections::BTreeMap;
use std::fmt::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RankingEnsemble;
use crate::seed;
use crate::stability::spearman;
use crate::svg;

pub const MAX_ITER: usize = 500;
pub const TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointLabel {
    pub ranker: String,
    pub run: usize,
}

/// Symmetric, non-negative, zero-diagonal matrix with one label per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityMatrix {
    n: usize,
    values: Vec<f64>,
    labels: Vec<PointLabel>,
}

impl DissimilarityMatrix {
    /// `values` is row-major `n × n`.
    pub fn new(values: Vec<f64>, labels: Vec<PointLabel>) -> Result<Self> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(Error::Shape(format!("{} values for {n} labelled points", values.len())));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidData(format!("diagonal entry {i} is not 0")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidData(format!("entry ({i}, {j}) = {v} is not a finite non-negative value")));
                }
                if (v - values[j * n + i]).abs() > 1e-12 {
                    return Err(Error::InvalidData(format!("entries ({i}, {j}) and ({j}, {i}) differ")));
                }
            }
        }
        Ok(Self { n, values, labels })
    }

    /// Unlabelled points get ranker name "" and their index as run.
    pub fn unlabelled(values: Vec<f64>, n: usize) -> Result<Self> {
        let labels = (0..n).map(|run| PointLabel { ranker: String::new(), run }).collect();
        Self::new(values, labels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn labels(&self) -> &[PointLabel] {
        &self.labels
    }
}

/// `δ_ij = 1 − SR(r_i, r_j)` over the runs of all ensembles, in input order.
pub fn rank_dissimilarity(ensembles: &[RankingEnsemble]) -> Result<DissimilarityMatrix> {
    let Some(first) = ensembles.first() else {
        return Err(Error::EmptyData("no ensembles to compare".into()));
    };
    let p = first.n_features();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for e in ensembles {
        if e.n_features() != p {
            return Err(Error::Shape(format!(
                "ensemble '{}' ranks {} features, expected {p}",
                e.ranker_name(),
                e.n_features()
            )));
        }
        for (run, r) in e.rankings().iter().enumerate() {
            points.push(r);
            labels.push(PointLabel { ranker: e.ranker_name().to_string(), run });
        }
    }
    let n = points.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = (1.0 - spearman(points[i], points[j])?).max(0.0);
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    DissimilarityMatrix::new(values, labels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub coordinates: Vec<[f64; 2]>,
    pub labels: Vec<PointLabel>,
    pub stress: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Normalized stress before the first and after every iteration.
    pub stress_history: Vec<f64>,
}

fn distances(x: &[[f64; 2]]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = ((x[i][0] - x[j][0]).powi(2) + (x[i][1] - x[j][1]).powi(2)).sqrt();
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

/// `sqrt(Σ(d − δ)² / Σ δ²)` over `i < j`; 0 when all δ are 0 and all d are 0.
pub fn normalized_stress(delta: &DissimilarityMatrix, x: &[[f64; 2]]) -> f64 {
    let n = delta.n();
    let d = distances(x);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let t = delta.get(i, j);
            num += (d[i * n + j] - t).powi(2);
            den += t * t;
        }
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Classical (Torgerson) scaling: the top two eigenvectors of the
/// double-centred squared dissimilarities. `None` when the leading
/// eigenvalue is not positive.
fn classical(delta: &DissimilarityMatrix) -> Option<(Vec<[f64; 2]>, bool)> {
    let n = delta.n();
    let sq = DMatrix::from_fn(n, n, |i, j| delta.get(i, j).powi(2));
    let row_mean: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_mean[i] - row_mean[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&c)));
    let scale = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let (l1, l2) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]);
    if l1 <= 1e-12 * scale {
        return None;
    }
    let flat = l2 <= 1e-12 * scale;
    let mut x = vec![[0.0; 2]; n];
    for (axis, &k) in order[..2].iter().enumerate() {
        let lambda = eig.eigenvalues[k];
        if lambda <= 1e-12 * scale {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        // fix the eigenvector sign so output does not depend on the solver's choice
        let pivot = (0..n).max_by(|&a, &c| v[a].abs().total_cmp(&v[c].abs()).then(c.cmp(&a))).unwrap_or(0);
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            x[i][axis] = sign * v[i] * lambda.sqrt();
        }
    }
    Some((x, flat))
}

/// One Guttman transform: `X ← B(X)·X / n` (unit weights).
fn guttman(delta: &DissimilarityMatrix, x: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = x.len();
    let d = distances(x);
    let mut out = vec![[0.0; 2]; n];
    for i in 0..n {
        let mut diag = 0.0;
        let mut acc = [0.0; 2];
        for j in 0..n {
            if i == j {
                continue;
            }
            let dij = d[i * n + j];
            let bij = if dij > 0.0 { -delta.get(i, j) / dij } else { 0.0 };
            diag -= bij;
            acc[0] += bij * x[j][0];
            acc[1] += bij * x[j][1];
        }
        out[i] = [(acc[0] + diag * x[i][0]) / n as f64, (acc[1] + diag * x[i][1]) / n as f64];
    }
    out
}

pub fn embed(delta: &DissimilarityMatrix, seed: u64) -> Result<Embedding> {
    let n = delta.n();
    if n < 3 {
        return Err(Error::Domain(format!("embedding needs at least 3 points, got {n}")));
    }
    let labels = delta.labels().to_vec();
    if delta.values.iter().all(|&v| v == 0.0) {
        return Ok(Embedding {
            coordinates: vec![[0.0; 2]; n],
            labels,
            stress: 0.0,
            iterations: 0,
            converged: true,
            stress_history: vec![0.0],
        });
    }
    let mut rng = seed::rng(seed);
    let spread = delta.values.iter().copied().fold(0.0, f64::max);
    let mut x = match classical(delta) {
        Some((x, false)) => x,
        Some((mut x, true)) => {
            // collinear start: SMACOF would never leave the line, so give the
            // second axis a small seeded perturbation
            for p in &mut x {
                p[1] = 1e-3 * spread * rng.random_range(-1.0..1.0);
            }
            x
        }
        None => (0..n)
            .map(|_| [spread * rng.random_range(-0.5..0.5), spread * rng.random_range(-0.5..0.5)])
            .collect(),
    };
    let mut stress = normalized_stress(delta, &x);
    let mut history = vec![stress];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        let next = guttman(delta, &x);
        let s = normalized_stress(delta, &next);
        iterations += 1;
        if !s.is_finite() {
            return Err(Error::Domain("stress became non-finite during majorization".into()));
        }
        let improvement = stress - s;
        x = next;
        stress = s;
        history.push(stress);
        if improvement < TOLERANCE {
            converged = true;
            break;
        }
    }
    Ok(Embedding {
        coordinates: x,
        labels,
        stress,
        iterations,
        converged,
        stress_history: history,
    })
}

/// Root-mean-square distance of each ranker's points to their centroid.
/// Rankers with fewer than two points are skipped.
pub fn dispersion(e: &Embedding) -> BTreeMap<String, f64> {
    let mut groups: BTreeMap<&str, Vec<[f64; 2]>> = BTreeMap::new();
    for (label, c) in e.labels.iter().zip(&e.coordinates) {
        groups.entry(label.ranker.as_str()).or_default().push(*c);
    }
    let mut out = BTreeMap::new();
    for (name, pts) in groups {
        if pts.len() < 2 {
            log::warn!("dispersion: ranker '{name}' has a single point; omitted");
            continue;
        }
        let m = pts.len() as f64;
        let cx = pts.iter().map(|p| p[0]).sum::<f64>() / m;
        let cy = pts.iter().map(|p| p[1]).sum::<f64>() / m;
        let ms = pts.iter().map(|p| (p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sum::<f64>() / m;
        out.insert(name.to_string(), ms.sqrt());
    }
    out
}

/// Stress and iteration summary written next to the coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSummary {
    pub points: usize,
    pub stress: f64,
    pub iterations: usize,
    pub converged: bool,
    pub dispersion: BTreeMap<String, f64>,
}

impl Embedding {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("ranker,run,x,y\n");
        for (l, c) in self.labels.iter().zip(&self.coordinates) {
            let _ = writeln!(s, "{},{},{},{}", l.ranker, l.run, c[0], c[1]);
        }
        s
    }

    pub fn summary(&self) -> EmbeddingSummary {
        EmbeddingSummary {
            points: self.coordinates.len(),
            stress: self.stress,
            iterations: self.iterations,
            converged: self.converged,
            dispersion: dispersion(self),
        }
    }

    /// Scatter plot, one colour and glyph per ranker in order of appearance.
    pub fn to_svg(&self) -> String {
        let mut order: Vec<&str> = Vec::new();
        for l in &self.labels {
            if !order.contains(&l.ranker.as_str()) {
                order.push(&l.ranker);
            }
        }
        let series: Vec<svg::Series<'_>> = order
            .iter()
            .map(|&name| svg::Series {
                name,
                points: self
                    .labels
                    .iter()
                    .zip(&self.coordinates)
                    .filter(|(l, _)| l.ranker == name)
                    .map(|(_, c)| (c[0], c[1]))
                    .collect(),
            })
            .collect();
        let title = format!("Ranking outcomes, MDS (stress {:.4})", self.stress);
        svg::chart(&title, "dimension 1", "dimension 2", &series, svg::Style::Scatter, None)
    }
}
