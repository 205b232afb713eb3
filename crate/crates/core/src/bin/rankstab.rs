//! Command-line front end.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use rankstab::classifiers::{evaluate_subset, ClassifierKind, ClassifierSpec};
use rankstab::ingest::{generate_synthetic, load_csv, save_csv, CsvSchema, SyntheticSpec};
use rankstab::mds;
use rankstab::pipeline::{self, compare_feature_sets, emit_report, run_pipeline, NamedSet, PipelineConfig};
use rankstab::rankers::{rank, run_ensemble, RankerSpec};
use rankstab::stability::{ensemble_stability, jaccard_profile, Metric};
use rankstab::{aggregate_median, to_top_k, Dataset, Error, RankingEnsemble, RankingVector, Result, TopKMask};

#[derive(Parser)]
#[command(name = "rankstab", version, about = "Feature-ranking stability and AUC analysis for case-control data")]
struct Cli {
    /// Master seed (overrides any seed in the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; 0 picks the number of cores. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Label token marking a case; the other token is the control.
    #[arg(long, default_value = "1")]
    positive: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Spearman,
    Jaccard,
    Kuncheva,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset from a SyntheticSpec JSON (--config) to --out.
    Synth {
        #[arg(long, default_value = "label")]
        label_column: String,
    },
    /// Rank features with one RankerSpec (--config); with --runs, an ensemble.
    Rank {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long, default_value_t = 0.7)]
        fraction: f64,
    },
    /// Stability of ranking ensembles (JSON files).
    Stability {
        #[arg(required = true)]
        ensembles: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "spearman")]
        metric: MetricArg,
        /// Subset sizes for Jaccard/Kuncheva, comma separated.
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
    },
    /// 2D map of all runs of the given ensembles; writes into --out.
    Mds {
        #[arg(required = true)]
        ensembles: Vec<PathBuf>,
    },
    /// AUC against subset size for a ranking or ensemble JSON.
    Curve {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        ranking: PathBuf,
        #[arg(long, value_enum, default_value = "lr")]
        classifier: KindArg,
        /// Subset sizes, comma separated; default 1..=p.
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        folds: usize,
    },
    /// Full study from a PipelineConfig (--config); report written into --out.
    Pipeline {
        #[command(flatten)]
        data: DataArgs,
    },
    /// AUC of named feature sets (--config) under several classifiers.
    Compare {
        #[command(flatten)]
        data: DataArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Lr,
    Knn,
    Svm,
    Bt,
    Nn,
}

impl From<KindArg> for ClassifierKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Lr => ClassifierKind::LR,
            KindArg::Knn => ClassifierKind::KNN,
            KindArg::Svm => ClassifierKind::SVM,
            KindArg::Bt => ClassifierKind::BT,
            KindArg::Nn => ClassifierKind::NN,
        }
    }
}

/// Output of `rank` without `--runs`.
#[derive(Serialize, Deserialize)]
struct RankingFile {
    ranker: String,
    feature_names: Vec<String>,
    ranks: RankingVector,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareConfig {
    /// Set name → feature names.
    sets: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    intersections: Vec<(String, String)>,
    classifiers: Vec<ClassifierSpec>,
    #[serde(default = "five")]
    folds: usize,
    #[serde(default)]
    seed: u64,
}

fn five() -> usize {
    5
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn config_json<T: serde::de::DeserializeOwned>(cli: &Cli) -> Result<T> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("this subcommand needs --config".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn write_out(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| Error::Io {
                    path: parent.to_path_buf(),
                    source: e,
                })?;
            }
            fs::write(path, content).map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| Error::Io { path: "<stdout>".into(), source: e })
        }
    }
}

fn out_dir(cli: &Cli) -> Result<&Path> {
    cli.out
        .as_deref()
        .ok_or_else(|| Error::Config("this subcommand needs --out <directory>".into()))
}

fn load(args: &DataArgs) -> Result<Dataset> {
    let loaded = load_csv(&args.data, &CsvSchema::new(args.label_column.clone(), args.positive.clone()))?;
    if loaded.dropped > 0 {
        log::warn!("dropped {} rows with missing values", loaded.dropped);
    }
    Ok(loaded.dataset)
}

fn load_ensemble(path: &Path) -> Result<RankingEnsemble> {
    let e: RankingEnsemble = serde_json::from_str(&read(path)?)?;
    e.validate()?;
    Ok(e)
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth { label_column } => {
            let mut spec: SyntheticSpec = config_json(cli)?;
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            let out = cli
                .out
                .as_deref()
                .ok_or_else(|| Error::Config("synth needs --out <file.csv>".into()))?;
            let data = generate_synthetic(&spec)?;
            save_csv(&data.dataset, label_column, out)?;
            let relevant: Vec<&str> = data.relevant.iter().map(|&j| data.dataset.feature_names()[j].as_str()).collect();
            println!("{}", serde_json::to_string(&serde_json::json!({ "relevant": relevant }))?);
        }
        Command::Rank { data, runs, fraction } => {
            let spec: RankerSpec = config_json(cli)?;
            let d = load(data)?;
            let seed = cli.seed.unwrap_or(0);
            let json = match runs {
                Some(runs) => pretty(&run_ensemble(&spec, &d, *runs, *fraction, seed)?)?,
                None => pretty(&RankingFile {
                    ranker: spec.label(),
                    feature_names: d.feature_names().to_vec(),
                    ranks: rank(&spec, &d, seed)?,
                })?,
            };
            write_out(cli.out.as_deref(), &json)?;
        }
        Command::Stability { ensembles, metric, k } => {
            let metric = match metric {
                MetricArg::Spearman => Metric::Spearman,
                MetricArg::Jaccard => Metric::Jaccard,
                MetricArg::Kuncheva => Metric::Kuncheva,
            };
            let mut rows = Vec::new();
            for path in ensembles {
                let e = load_ensemble(path)?;
                let mut row = serde_json::Map::new();
                row.insert("ranker".into(), e.ranker_name().into());
                row.insert("runs".into(), e.runs().into());
                match metric {
                    Metric::Spearman => {
                        row.insert("spearman".into(), ensemble_stability(&e, metric, None)?.value.into());
                    }
                    Metric::Jaccard if k.is_empty() => {
                        row.insert("jaccard".into(), serde_json::to_value(jaccard_profile(&e, &[e.n_features()])?)?);
                    }
                    Metric::Jaccard => {
                        row.insert("jaccard".into(), serde_json::to_value(jaccard_profile(&e, k)?)?);
                    }
                    Metric::Kuncheva => {
                        if k.is_empty() {
                            return Err(Error::Config("kuncheva needs --k".into()));
                        }
                        let values = k
                            .iter()
                            .map(|&kk| Ok(serde_json::json!({"k": kk, "value": ensemble_stability(&e, metric, Some(kk))?.value})))
                            .collect::<Result<Vec<_>>>()?;
                        row.insert("kuncheva".into(), values.into());
                    }
                }
                rows.push(serde_json::Value::Object(row));
            }
            write_out(cli.out.as_deref(), &pretty(&rows)?)?;
        }
        Command::Mds { ensembles } => {
            let dir = out_dir(cli)?;
            let all = ensembles.iter().map(|p| load_ensemble(p)).collect::<Result<Vec<_>>>()?;
            let dm = mds::rank_dissimilarity(&all)?;
            let emb = mds::embed(&dm, cli.seed.unwrap_or(0))?;
            fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })?;
            write_out(Some(&dir.join("mds_coords.csv")), &emb.to_csv())?;
            write_out(Some(&dir.join("mds_plot.svg")), &emb.to_svg())?;
            write_out(Some(&dir.join("mds_summary.json")), &pretty(&emb.summary())?)?;
        }
        Command::Curve {
            data,
            ranking,
            classifier,
            k,
            folds,
        } => {
            let d = load(data)?;
            let text = read(ranking)?;
            let r = match serde_json::from_str::<RankingFile>(&text) {
                Ok(f) => {
                    if f.feature_names != d.feature_names() {
                        return Err(Error::Shape("ranking feature names differ from the dataset's".into()));
                    }
                    f.ranks
                }
                Err(_) => {
                    let e: RankingEnsemble = serde_json::from_str(&text)?;
                    e.validate()?;
                    aggregate_median(&e)
                }
            };
            if r.len() != d.n_features() {
                return Err(Error::Shape(format!("ranking has {} entries, dataset {} features", r.len(), d.n_features())));
            }
            let spec = ClassifierSpec::new((*classifier).into());
            let grid: Vec<usize> = if k.is_empty() { (1..=d.n_features()).collect() } else { k.clone() };
            let seed = pipeline::evaluation_seed(cli.seed.unwrap_or(0), &spec);
            let mut csv = String::from("k,auc,accuracy\n");
            for &kk in &grid {
                let res = evaluate_subset(&spec, &d, &to_top_k(&r, kk)?, *folds, seed)?;
                csv.push_str(&format!("{kk},{},{}\n", res.auc, res.accuracy));
            }
            write_out(cli.out.as_deref(), &csv)?;
        }
        Command::Pipeline { data } => {
            let mut cfg: PipelineConfig = config_json(cli)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let dir = out_dir(cli)?;
            let d = load(data)?;
            cfg.validate(d.n_features())?;
            let report = run_pipeline(&cfg, &d, Some(dir))?;
            let manifest = emit_report(&report, dir)?;
            log::info!("wrote {} files to {}", manifest.files.len(), dir.display());
        }
        Command::Compare { data } => {
            let cfg: CompareConfig = config_json(cli)?;
            let d = load(data)?;
            let sets = cfg
                .sets
                .iter()
                .map(|(name, features)| {
                    let idx = features
                        .iter()
                        .map(|f| d.feature_index(f).ok_or_else(|| Error::Config(format!("set '{name}': unknown feature '{f}'"))))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(NamedSet {
                        name: name.clone(),
                        mask: TopKMask::from_indices(d.n_features(), &idx)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let table = compare_feature_sets(&d, &sets, &cfg.intersections, &cfg.classifiers, cfg.folds, cli.seed.unwrap_or(cfg.seed))?;
            write_out(cli.out.as_deref(), &table.to_csv())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
