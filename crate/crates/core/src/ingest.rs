//! CSV ingestion with listwise deletion, standardization, subsampling and
//! synthetic case-control data.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, Matrix};
use crate::seed;

/// How to read a case-control CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label_column: String,
    #[serde(default = "default_missing_tokens")]
    pub missing_tokens: BTreeSet<String>,
    pub positive_label: String,
}

fn default_missing_tokens() -> BTreeSet<String> {
    [String::new(), "NA".to_string()].into_iter().collect()
}

impl CsvSchema {
    pub fn new(label_column: impl Into<String>, positive_label: impl Into<String>) -> Self {
        Self {
            label_column: label_column.into(),
            missing_tokens: default_missing_tokens(),
            positive_label: positive_label.into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.missing_tokens.contains(&self.positive_label) {
            return Err(Error::Schema(format!(
                "positive label '{}' is also a missing token",
                self.positive_label
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    /// Rows removed because they held a missing token.
    pub dropped: usize,
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<LoadedCsv> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

/// Reads CSV from any reader; see [`load_csv`].
pub fn read_csv<R: std::io::Read>(reader: R, schema: &CsvSchema) -> Result<LoadedCsv> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("cannot read header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let label_col = header
        .iter()
        .position(|h| *h == schema.label_column)
        .ok_or_else(|| Error::Schema(format!("label column '{}' not in header", schema.label_column)))?;
    let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| c != label_col).collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut negative: Option<String> = None;
    let mut dropped = 0;
    for (r, rec) in rdr.records().enumerate() {
        // Row numbers count the header as row 1.
        let row = r + 2;
        let rec = rec.map_err(|e| Error::Format {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        if rec.len() != header.len() {
            return Err(Error::Format {
                row,
                column: String::new(),
                message: format!("{} fields, header has {}", rec.len(), header.len()),
            });
        }
        if rec.iter().any(|cell| schema.missing_tokens.contains(cell)) {
            dropped += 1;
            continue;
        }
        let token = &rec[label_col];
        let label = if token == schema.positive_label {
            1
        } else {
            match &negative {
                None => {
                    negative = Some(token.to_string());
                    0
                }
                Some(n) if n == token => 0,
                Some(n) => {
                    return Err(Error::Schema(format!(
                        "label column '{}' has a third token '{token}' (besides '{}' and '{n}') at row {row}",
                        schema.label_column, schema.positive_label
                    )))
                }
            }
        };
        labels.push(label);
        for &c in &feature_cols {
            let v: f64 = rec[c].parse().map_err(|_| Error::Format {
                row,
                column: header[c].clone(),
                message: format!("'{}' is not a number", &rec[c]),
            })?;
            if !v.is_finite() {
                return Err(Error::Format {
                    row,
                    column: header[c].clone(),
                    message: format!("'{}' is not finite", &rec[c]),
                });
            }
            values.push(v);
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyData(format!(
            "all rows removed by listwise deletion ({dropped} dropped)"
        )));
    }
    let names = feature_cols.iter().map(|&c| header[c].clone()).collect();
    let features = Matrix::new(labels.len(), feature_cols.len(), values)?;
    Ok(LoadedCsv {
        dataset: Dataset::new(names, features, labels)?,
        dropped,
    })
}

/// Writes features followed by a 0/1 label column. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv<W: std::io::Write>(d: &Dataset, label_column: &str, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::InvalidData(format!("csv write: {e}"));
    let mut header: Vec<&str> = d.feature_names().iter().map(String::as_str).collect();
    header.push(label_column);
    w.write_record(&header).map_err(csv_err)?;
    let mut rec = Vec::with_capacity(header.len());
    for i in 0..d.n_instances() {
        rec.clear();
        rec.extend(d.features().row(i).iter().map(|v| v.to_string()));
        rec.push(d.labels()[i].to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn save_csv(d: &Dataset, label_column: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(d, label_column, std::io::BufWriter::new(f))
}

/// Per-feature mean and population standard deviation.
///
/// Features whose deviation is zero are constant and map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows() as f64;
        let p = x.cols();
        let mut mean = vec![0.0; p];
        for i in 0..x.rows() {
            for (m, v) in mean.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; p];
        for i in 0..x.rows() {
            for ((s, v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let sd = var
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = (s / n).sqrt();
                if sd <= 1e-12 * m.abs().max(1.0) {
                    0.0
                } else {
                    sd
                }
            })
            .collect();
        Self { mean, sd }
    }

    pub fn is_constant(&self, j: usize) -> bool {
        self.sd[j] == 0.0
    }

    pub fn transform_row(&self, row: &[f64], out: &mut [f64]) {
        for (j, (o, v)) in out.iter_mut().zip(row).enumerate() {
            *o = if self.sd[j] == 0.0 {
                0.0
            } else {
                (v - self.mean[j]) / self.sd[j]
            };
        }
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::Shape(format!(
                "standardizer fitted on {} features, got {}",
                self.mean.len(),
                x.cols()
            )));
        }
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for i in 0..x.rows() {
            self.transform_row(x.row(i), out.row_mut(i));
        }
        Ok(out)
    }
}

/// Standardizes every feature to mean 0 and unit population deviation.
pub fn standardize(d: &Dataset) -> Result<(Dataset, Standardizer)> {
    let s = Standardizer::fit(d.features());
    let x = s.transform(d.features())?;
    Ok((d.with_features(x)?, s))
}

const SUBSAMPLE_RETRIES: usize = 100;

/// Draws `floor(fraction * M)` rows without replacement, redrawing while a
/// class is missing.
pub fn subsample(d: &Dataset, fraction: f64, seed: u64) -> Result<Dataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("subsample fraction {fraction} not in (0, 1]")));
    }
    let m = d.n_instances();
    let n = (fraction * m as f64).floor() as usize;
    if n < 2 {
        return Err(Error::DegenerateSample(format!(
            "fraction {fraction} of {m} rows leaves {n} rows"
        )));
    }
    let mut rng = seed::rng(seed);
    for _ in 0..SUBSAMPLE_RETRIES {
        let idx = index::sample(&mut rng, m, n).into_vec();
        let cases = idx.iter().filter(|&&i| d.labels()[i] == 1).count();
        if cases > 0 && cases < n {
            return d.select_rows(&idx);
        }
    }
    Err(Error::DegenerateSample(format!(
        "no two-class sample of {n} rows within {SUBSAMPLE_RETRIES} draws"
    )))
}

/// Recipe for a synthetic case-control dataset with planted signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_instances: usize,
    pub n_informative: usize,
    pub n_noise: usize,
    pub n_redundant: usize,
    /// True log-odds weight of each informative feature.
    pub coefficients: Vec<f64>,
    /// Fraction of informative and noise features drawn as 0/1/2 genotypes.
    #[serde(default)]
    pub snp_fraction: f64,
    #[serde(default = "default_prevalence")]
    pub prevalence: f64,
    /// Standard deviation of the noise added to redundant copies.
    #[serde(default = "default_redundant_noise")]
    pub redundant_noise_sd: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_prevalence() -> f64 {
    1.0 / 3.0
}

fn default_redundant_noise() -> f64 {
    0.5
}

impl SyntheticSpec {
    pub fn n_features(&self) -> usize {
        self.n_informative + self.n_noise + self.n_redundant
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("synthetic spec: {m}")));
        if self.coefficients.len() != self.n_informative {
            return bad(format!(
                "{} coefficients for {} informative features",
                self.coefficients.len(),
                self.n_informative
            ));
        }
        if self.n_features() == 0 {
            return bad("no features".into());
        }
        if self.n_redundant > 0 && self.n_informative == 0 {
            return bad("redundant features need informative ones to copy".into());
        }
        if self.n_instances < 2 {
            return bad("need at least 2 instances".into());
        }
        if !(0.0..=1.0).contains(&self.snp_fraction) {
            return bad(format!("snp_fraction {} not in [0, 1]", self.snp_fraction));
        }
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return bad(format!("prevalence {} not in (0, 1)", self.prevalence));
        }
        if !(self.redundant_noise_sd >= 0.0) || self.coefficients.iter().any(|c| !c.is_finite()) {
            return bad("non-finite or negative parameters".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub dataset: Dataset,
    /// Column indices of the informative features, ascending.
    pub relevant: Vec<usize>,
}

const LABEL_RETRIES: usize = 200;
const PREVALENCE_TOLERANCE: f64 = 0.05;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Draws a dataset whose labels follow a logistic model on the informative
/// features. Columns are shuffled so planted features are not clustered at
/// low indices.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = seed::rng(spec.seed);
    let n = spec.n_instances;
    let base = spec.n_informative + spec.n_noise;
    let p = spec.n_features();

    let n_snp = (spec.snp_fraction * base as f64).round() as usize;
    let mut is_snp = vec![false; base];
    is_snp[..n_snp].iter_mut().for_each(|b| *b = true);
    is_snp.shuffle(&mut rng);
    let maf: Vec<f64> = (0..base).map(|_| rng.random_range(0.1..=0.5)).collect();

    // Logical columns: informative, then noise, then redundant copies.
    let mut logical = Matrix::zeros(n, p);
    for i in 0..n {
        let row = logical.row_mut(i);
        for j in 0..base {
            row[j] = if is_snp[j] {
                f64::from(u8::from(rng.random_bool(maf[j])) + u8::from(rng.random_bool(maf[j])))
            } else {
                StandardNormal.sample(&mut rng)
            };
        }
        for r in 0..spec.n_redundant {
            let src = r % spec.n_informative;
            let eps: f64 = StandardNormal.sample(&mut rng);
            row[base + r] = row[src] + spec.redundant_noise_sd * eps;
        }
    }

    let eta: Vec<f64> = (0..n)
        .map(|i| {
            let row = logical.row(i);
            spec.coefficients.iter().zip(row).map(|(w, x)| w * x).sum()
        })
        .collect();
    let intercept = calibrate_intercept(&eta, spec.prevalence)?;
    let probs: Vec<f64> = eta.iter().map(|e| sigmoid(e + intercept)).collect();

    let mut labels = None;
    for _ in 0..LABEL_RETRIES {
        let draw: Vec<u8> = probs.iter().map(|&q| u8::from(rng.random_bool(q))).collect();
        let cases = draw.iter().filter(|&&l| l == 1).count();
        let rate = cases as f64 / n as f64;
        if cases > 0 && cases < n && (rate - spec.prevalence).abs() <= PREVALENCE_TOLERANCE {
            labels = Some(draw);
            break;
        }
    }
    let labels = labels.ok_or_else(|| {
        Error::Generation(format!(
            "case rate could not be held within {PREVALENCE_TOLERANCE} of {} in {LABEL_RETRIES} draws",
            spec.prevalence
        ))
    })?;

    let mut perm: Vec<usize> = (0..p).collect();
    perm.shuffle(&mut rng);
    // perm[c] = logical column shown at position c
    let features = logical.select_columns(&perm);
    let width = p.to_string().len();
    let names = (0..p).map(|c| format!("x{:0width$}", c + 1)).collect();
    let mut relevant: Vec<usize> = (0..p).filter(|&c| perm[c] < spec.n_informative).collect();
    relevant.sort_unstable();
    Ok(SyntheticData {
        dataset: Dataset::new(names, features, labels)?,
        relevant,
    })
}

/// Finds `b` with mean(sigmoid(eta + b)) = prevalence by bisection.
fn calibrate_intercept(eta: &[f64], prevalence: f64) -> Result<f64> {
    let spread = eta.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let rate = |b: f64| eta.iter().map(|e| sigmoid(e + b)).sum::<f64>() / eta.len() as f64;
    let (mut lo, mut hi) = (-spread - 60.0, spread + 60.0);
    if !(rate(lo) < prevalence && rate(hi) > prevalence) {
        return Err(Error::Generation(format!(
            "prevalence {prevalence} not reachable by intercept"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rate(mid) < prevalence {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> CsvSchema {
        CsvSchema::new("label", "case")
    }

    #[test]
    fn listwise_deletion_drops_na_rows() {
        let csv = "a,b,label\n1,2,case\n3,NA,control\n5,6,control\n7,8,case\n9,10,control\n";
        let out = read_csv(csv.as_bytes(), &schema()).unwrap();
        assert_eq!(out.dataset.n_instances(), 4);
        assert_eq!(out.dropped, 1);
        assert_eq!(out.dataset.labels(), &[1, 0, 1, 0]);
    }

    #[test]
    fn complete_file_keeps_every_row() {
        let csv = "a,label\n1,case\n2,control\n3,control\n";
        let out = read_csv(csv.as_bytes(), &schema()).unwrap();
        assert_eq!(out.dataset.n_instances(), 3);
        assert_eq!(out.dropped, 0);
    }

    #[test]
    fn third_label_token_is_a_schema_error() {
        let csv = "a,label\n1,case\n2,control\n3,other\n";
        assert!(matches!(read_csv(csv.as_bytes(), &schema()), Err(Error::Schema(_))));
    }

    #[test]
    fn missing_label_column_is_a_schema_error() {
        let csv = "a,b\n1,2\n";
        assert!(matches!(read_csv(csv.as_bytes(), &schema()), Err(Error::Schema(_))));
    }

    #[test]
    fn bad_cell_names_row_and_column() {
        let csv = "a,b,label\n1,2,case\n3,x,control\n";
        match read_csv(csv.as_bytes(), &schema()) {
            Err(Error::Format { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "b");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn all_rows_missing_is_empty_data() {
        let csv = "a,label\nNA,case\n,control\n";
        assert!(matches!(read_csv(csv.as_bytes(), &schema()), Err(Error::EmptyData(_))));
    }

    #[test]
    fn standardize_by_hand() {
        let x = Matrix::new(3, 2, vec![1.0, 5.0, 2.0, 5.0, 3.0, 5.0]).unwrap();
        let d = Dataset::new(vec!["a".into(), "c".into()], x, vec![0, 1, 0]).unwrap();
        let (z, s) = standardize(&d).unwrap();
        let sd = (2.0f64 / 3.0).sqrt();
        let expect = [-1.0 / sd, 0.0, 1.0 / sd];
        for i in 0..3 {
            assert!((z.features().get(i, 0) - expect[i]).abs() < 1e-12);
            assert_eq!(z.features().get(i, 1), 0.0);
        }
        assert!((expect[2] - 1.224_744_871_391_589).abs() < 1e-12);
        assert!(s.is_constant(1));
        // refitting on standardized data is the identity
        let (zz, _) = standardize(&z).unwrap();
        for (a, b) in zz.features().as_slice().iter().zip(z.features().as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn toy(n: usize) -> Dataset {
        let x = Matrix::new(n, 1, (0..n).map(|i| i as f64).collect()).unwrap();
        let labels = (0..n).map(|i| u8::from(i % 3 == 0)).collect();
        Dataset::new(vec!["a".into()], x, labels).unwrap()
    }

    #[test]
    fn subsample_sizes_and_determinism() {
        let d = toy(3295);
        let s = subsample(&d, 0.7, 11).unwrap();
        assert_eq!(s.n_instances(), 2306);
        assert_eq!(s, subsample(&d, 0.7, 11).unwrap());

        let small = toy(30);
        let full = subsample(&small, 1.0, 3).unwrap();
        let mut a: Vec<f64> = full.features().column(0);
        a.sort_by(f64::total_cmp);
        assert_eq!(a, small.features().column(0));
    }

    #[test]
    fn subsample_rows_come_from_input() {
        let d = toy(50);
        let s = subsample(&d, 0.5, 1).unwrap();
        for i in 0..s.n_instances() {
            let v = s.features().get(i, 0) as usize;
            assert_eq!(s.labels()[i], d.labels()[v]);
        }
    }

    #[test]
    fn tiny_subsample_is_degenerate() {
        assert!(matches!(subsample(&toy(3), 0.5, 0), Err(Error::DegenerateSample(_))));
    }

    fn spec(coefs: Vec<f64>) -> SyntheticSpec {
        SyntheticSpec {
            n_instances: 3000,
            n_informative: coefs.len(),
            n_noise: 4,
            n_redundant: 1,
            coefficients: coefs,
            snp_fraction: 0.5,
            prevalence: 1.0 / 3.0,
            redundant_noise_sd: 0.5,
            seed: 5,
        }
    }

    #[test]
    fn synthetic_is_deterministic_and_calibrated() {
        let s = spec(vec![1.0, -1.5]);
        let a = generate_synthetic(&s).unwrap();
        let b = generate_synthetic(&s).unwrap();
        assert_eq!(a.dataset, b.dataset);
        assert_eq!(a.relevant, b.relevant);
        assert_eq!(a.relevant.len(), 2);
        let rate = a.dataset.n_cases() as f64 / 3000.0;
        assert!((rate - 1.0 / 3.0).abs() <= 0.05);
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        write_csv(&a.dataset, "label", &mut buf_a).unwrap();
        write_csv(&b.dataset, "label", &mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);
    }

    #[test]
    fn null_model_has_no_correlated_feature() {
        let mut s = spec(vec![0.0, 0.0]);
        s.n_redundant = 0;
        let out = generate_synthetic(&s).unwrap();
        let d = &out.dataset;
        let rate = d.n_cases() as f64 / d.n_instances() as f64;
        // 4 binomial standard deviations
        assert!((rate - 1.0 / 3.0).abs() < 4.0 * (2.0 / 9.0 / 3000.0f64).sqrt());
        let y: Vec<f64> = d.labels().iter().map(|&l| f64::from(l)).collect();
        for j in 0..d.n_features() {
            let r = pearson(&d.features().column(j), &y);
            // |r| < 4/sqrt(n) under the null
            assert!(r.abs() < 4.0 / (3000.0f64).sqrt(), "feature {j} r={r}");
        }
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn spec_invariants_checked() {
        let mut s = spec(vec![1.0]);
        s.n_informative = 2;
        assert!(matches!(generate_synthetic(&s), Err(Error::Config(_))));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let out = generate_synthetic(&spec(vec![0.7, 2.0])).unwrap();
        let mut buf = Vec::new();
        write_csv(&out.dataset, "label", &mut buf).unwrap();
        let back = read_csv(&buf[..], &CsvSchema::new("label", "1")).unwrap();
        assert_eq!(back.dropped, 0);
        assert_eq!(back.dataset, out.dataset);
    }
}
