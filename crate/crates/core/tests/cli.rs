use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn rankstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankstab")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_json(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

/// Synthesizes a small dataset and returns its path.
fn synth(dir: &Path) -> PathBuf {
    let spec = write_json(
        dir,
        "spec.json",
        &json!({
            "n_instances": 150, "n_informative": 3, "n_noise": 9, "n_redundant": 0,
            "coefficients": [1.5, -1.5, 1.0], "snp_fraction": 0.0, "prevalence": 0.4,
            "redundant_noise_sd": 0.5, "seed": 3
        }),
    );
    let data = dir.join("data.csv");
    let o = rankstab(&["synth", "--config", s(&spec), "--out", s(&data)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let relevant: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(relevant["relevant"].as_array().unwrap().len(), 3);
    data
}

#[test]
fn rank_stability_mds_curve_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = synth(d);
    let pearson = write_json(d, "pearson.json", &json!({"kind": "Pearson"}));
    let forest = write_json(d, "rf.json", &json!({"kind": "RandomForest", "hyperparameters": {"n_trees": 20}}));

    let single = d.join("single.json");
    let o = rankstab(&["rank", "--config", s(&pearson), "--data", s(&data), "--out", s(&single)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let mut ensembles = Vec::new();
    for (cfg, name) in [(&pearson, "e_p.json"), (&forest, "e_rf.json")] {
        let out = d.join(name);
        let o = rankstab(&["rank", "--config", s(cfg), "--data", s(&data), "--runs", "4", "--out", s(&out), "--seed", "9"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        ensembles.push(out);
    }

    let o = rankstab(&["stability", s(&ensembles[0]), s(&ensembles[1]), "--metric", "jaccard", "--k", "3,12"]);
    assert_eq!(code(&o), 0);
    let rows: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert_eq!(rows[0]["jaccard"]["points"][1]["value"], json!(1.0));

    let mds_dir = d.join("mds");
    let o = rankstab(&["mds", s(&ensembles[0]), s(&ensembles[1]), "--out", s(&mds_dir)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let coords = std::fs::read_to_string(mds_dir.join("mds_coords.csv")).unwrap();
    assert_eq!(coords.lines().count(), 1 + 8);
    assert!(mds_dir.join("mds_plot.svg").exists());

    for ranking in [&single, &ensembles[1]] {
        let o = rankstab(&["curve", "--data", s(&data), "--ranking", s(ranking), "--k", "1,3,12", "--classifier", "lr"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let csv = String::from_utf8(o.stdout).unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("k,auc,accuracy"));
    }
}

#[test]
fn compare_writes_full_and_intersection_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = synth(d);
    let cfg = write_json(
        d,
        "cmp.json",
        &json!({
            "sets": {"a": ["x01", "x02", "x03"], "b": ["x02", "x03", "x04"]},
            "intersections": [["a", "b"]],
            "classifiers": [{"kind": "LR"}],
            "folds": 3
        }),
    );
    let o = rankstab(&["compare", "--config", s(&cfg), "--data", s(&data)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    let sets: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(sets, ["full", "a", "b", "a&b"]);
}

#[test]
fn pipeline_output_is_seed_driven() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = synth(d);
    let cfg = write_json(
        d,
        "cfg.json",
        &json!({"rankers": [{"kind": "Pearson"}], "classifiers": [{"kind": "LR"}], "runs": 3, "curve_k": [1, 5, 12]}),
    );
    let mut reports = Vec::new();
    for (seed, name) in [("1", "a"), ("1", "b"), ("2", "c")] {
        let out = d.join(name);
        let o = rankstab(&["pipeline", "--config", s(&cfg), "--data", s(&data), "--out", s(&out), "--seed", seed]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        reports.push(std::fs::read(out.join("report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_ne!(reports[0], reports[2]);
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = synth(d);

    // Config errors.
    let bogus = write_json(d, "bogus.json", &json!({"kind": "Pearson", "hyperparameters": {"nope": 1}}));
    assert_eq!(code(&rankstab(&["rank", "--config", s(&bogus), "--data", s(&data)])), 2);
    let missing_cfg = d.join("absent.json");
    assert_eq!(code(&rankstab(&["rank", "--config", s(&missing_cfg), "--data", s(&data)])), 2);
    assert_eq!(code(&rankstab(&["no-such-subcommand"])), 2);
    let bad_pipeline = write_json(d, "p.json", &json!({"rankers": [], "classifiers": [{"kind": "LR"}]}));
    assert_eq!(code(&rankstab(&["pipeline", "--config", s(&bad_pipeline), "--data", s(&data), "--out", s(&d.join("o"))])), 2);

    // Data errors.
    let pearson = write_json(d, "pearson.json", &json!({"kind": "Pearson"}));
    assert_eq!(code(&rankstab(&["rank", "--config", s(&pearson), "--data", s(&d.join("nope.csv"))])), 3);
    assert_eq!(code(&rankstab(&["rank", "--config", s(&pearson), "--data", s(&data), "--label-column", "absent"])), 3);

    // Numeric/domain errors: Kuncheva is undefined at k = p.
    let ens = d.join("e.json");
    assert_eq!(code(&rankstab(&["rank", "--config", s(&pearson), "--data", s(&data), "--runs", "3", "--out", s(&ens)])), 0);
    assert_eq!(code(&rankstab(&["stability", s(&ens), "--metric", "kuncheva", "--k", "12"])), 4);
}
