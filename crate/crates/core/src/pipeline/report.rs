//! Writes a [`StabilityReport`] to disk with a hashed manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::StabilityReport;
use crate::error::{Error, Result};
use crate::svg;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Option<Manifest>> {
        let path = dir.join(MANIFEST_FILE);
        match fs::read_to_string(&path) {
            Ok(s) => Ok(Some(serde_json::from_str(&s)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    pub fn get(&self, path: &str) -> Option<&ManifestEntry> {
        self.files.iter().find(|f| f.path == path)
    }
}

/// File-name-safe form of a label.
fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn files(report: &StabilityReport) -> Result<Vec<(String, String)>> {
    let mut out = vec![
        ("report.json".to_string(), report.to_json()?),
        ("baseline.csv".to_string(), report.baseline_csv()),
        ("stability_spearman.csv".to_string(), report.stability_csv()),
        ("jaccard_profile.csv".to_string(), report.jaccard_csv()),
        ("best_subsets.csv".to_string(), report.best_subsets.to_csv()),
    ];
    for c in &report.curves {
        out.push((format!("curves/{}_{}.csv", slug(&c.ranker), slug(&c.classifier)), c.to_csv()));
    }
    for b in &report.baselines {
        let series: Vec<svg::Series<'_>> = report
            .curves
            .iter()
            .filter(|c| c.classifier == b.classifier)
            .map(|c| svg::Series {
                name: &c.ranker,
                points: c.points.iter().map(|p| (p.k as f64, p.auc)).collect(),
            })
            .collect();
        let title = format!("{}: AUC by number of top-ranked features", b.classifier);
        let chart = svg::chart(&title, "k", "AUC", &series, svg::Style::Lines, Some(("full feature set", b.result.auc)));
        out.push((format!("curves/{}.svg", slug(&b.classifier)), chart));
    }
    if let Some(m) = &report.mds {
        out.push(("mds_coords.csv".to_string(), m.embedding.to_csv()));
        out.push(("mds_plot.svg".to_string(), m.embedding.to_svg()));
        let mut summary = serde_json::to_string_pretty(&m.embedding.summary())?;
        summary.push('\n');
        out.push(("mds_summary.json".to_string(), summary));
    }
    let mut seen = std::collections::BTreeSet::new();
    for (name, _) in &out {
        if !seen.insert(name.as_str()) {
            return Err(Error::Config(format!("two outputs map to the file name '{name}'")));
        }
    }
    Ok(out)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every report artifact into `dir` and a `manifest.json` listing
/// them with SHA-256 hashes. Files listed by a previous manifest in `dir`
/// are removed first, so the manifest always matches the directory's
/// report files. Everything is rendered and validated before any write.
pub fn emit_report(report: &StabilityReport, dir: &Path) -> Result<Manifest> {
    report.config.validate(report.dataset.features)?;
    let rendered = files(report)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    if let Some(old) = Manifest::load(dir)? {
        for f in old.files {
            let path = dir.join(&f.path);
            match fs::remove_file(&path) {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(Error::io(path, e)),
            }
        }
    }
    let stale = dir.join(super::PARTIAL_FILE);
    if stale.exists() {
        fs::remove_file(&stale).map_err(|e| Error::io(stale, e))?;
    }
    let mut entries = Vec::with_capacity(rendered.len());
    for (name, content) in &rendered {
        let path: PathBuf = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        entries.push(ManifestEntry {
            path: name.clone(),
            bytes: content.len(),
            sha256: sha256_hex(content.as_bytes()),
        });
    }
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest { files: entries };
    let path = dir.join(MANIFEST_FILE);
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(path, e))?;
    Ok(manifest)
}
