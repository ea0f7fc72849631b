use std::path::Path;
use std::process::{Command, Output};

use neim_cli::{cmd_report, cmd_snapshots, cmd_train, Experiment, RunConfig};
use serde_json::json;

fn small_config(dir: &Path, experiment: &str) -> std::path::PathBuf {
    let cfg = json!({
        "experiment": experiment,
        "n": 20,
        "m": 7,
        "test_count": 25,
        "r": 4,
        "mode_counts": [1, 2, 3],
        "net": {"hidden": [3], "epochs": 200, "learning_rate": 0.01, "lr_decay_factor": 0.5, "lr_decay_every": null},
        "stop": {"tol": 0.0, "max_modes": 3, "elbow_fraction": 0.0}
    });
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    path
}

fn neim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neim")).args(args).output().unwrap()
}

fn run_all(dir: &Path, experiment: &str) {
    let cfg = small_config(dir, experiment);
    let out = dir.join("out");
    for cmd in ["snapshots", "train", "report"] {
        let o = neim(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "3", "--exact-neim"]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn full_pipeline_through_the_binary() {
    for experiment in ["exp1", "exp2"] {
        let dir = tempfile::tempdir().unwrap();
        run_all(dir.path(), experiment);
        let out = dir.path().join("out");
        for f in ["snapshots.csv", "model.json", "training_log.csv", "errors.csv", "per_parameter_errors.csv"] {
            assert!(out.join(f).exists(), "{experiment}: missing {f}");
        }
        let errors = std::fs::read_to_string(out.join("errors.csv")).unwrap();
        let mut lines = errors.lines();
        assert_eq!(lines.next(), Some("method,mode_count,avg_abs_error"));
        let methods: std::collections::BTreeSet<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(methods.into_iter().collect::<Vec<_>>(), vec!["deim", "neim", "neim_exact"]);
        let per = std::fs::read_to_string(out.join("per_parameter_errors.csv")).unwrap();
        assert_eq!(per.lines().count(), 1 + 3 * 3 * 25);
    }
}

#[test]
fn snapshot_file_layout_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let args = ["snapshots", "--experiment", "exp2", "--out", out.to_str().unwrap()];
    assert!(neim(&args).status.success());
    let first = std::fs::read(out.join("snapshots.csv")).unwrap();
    assert!(neim(&args).status.success());
    assert_eq!(std::fs::read(out.join("snapshots.csv")).unwrap(), first);
    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 101);
    assert!(header[0].starts_with("mu;experiment=exp2;n=100;m=51;version="));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 51);
    assert_eq!(rows[0][0], 1.0);
    assert_eq!(rows[50][0], std::f64::consts::PI);
    assert!(rows.iter().all(|r| r.len() == 101 && r[1] == 0.0 && r[100] == 0.0));
}

#[test]
fn exp1_default_snapshots_shape() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::defaults(Experiment::Exp1);
    cfg.out_dir = dir.path().to_path_buf();
    let path = cmd_snapshots(&cfg).unwrap();
    let (header, set) = neim_cli::csvio::read_snapshots(&path).unwrap();
    assert_eq!((header.n, header.m, header.experiment.as_str()), (100, 51, "exp1"));
    assert_eq!((set.len(), set.dim()), (51, 100));
}

#[test]
fn emitted_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    run_all(dir.path(), "exp1");
    let out = dir.path().join("out");
    for f in ["snapshots.csv", "training_log.csv", "errors.csv", "per_parameter_errors.csv"] {
        let original = std::fs::read(out.join(f)).unwrap();
        let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(original.as_slice());
        let mut writer = csv::Writer::from_writer(Vec::new());
        for rec in reader.records() {
            let rec = rec.unwrap();
            let fields: Vec<String> = rec
                .iter()
                .map(|s| match s.parse::<f64>() {
                    Ok(x) if s.contains('.') || s.contains('e') => format!("{x}"),
                    _ => s.to_string(),
                })
                .collect();
            writer.write_record(&fields).unwrap();
        }
        assert_eq!(writer.into_inner().unwrap(), original, "{f}");
    }
}

#[test]
fn report_is_reproducible_without_retraining() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = small_config(dir.path(), "exp2");
    let mut cfg = RunConfig::load(&cfg_path, Experiment::Exp1).unwrap();
    cfg.out_dir = dir.path().join("out");
    cfg.exact_mode = true;
    cmd_snapshots(&cfg).unwrap();
    let trained = cmd_train(&cfg).unwrap();
    let log = trained.file.neim_exact.as_ref().unwrap().log().max_errors();
    assert!(log.windows(2).all(|w| w[1] <= w[0] + 1e-10 * w[0].max(1.0)));
    let a = cmd_report(&cfg).unwrap();
    let first = std::fs::read(cfg.errors_path()).unwrap();
    let first_per = std::fs::read(cfg.per_parameter_path()).unwrap();
    let b = cmd_report(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(std::fs::read(cfg.errors_path()).unwrap(), first);
    assert_eq!(std::fs::read(cfg.per_parameter_path()).unwrap(), first_per);
}

#[test]
fn failures_exit_nonzero_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("empty");
    let o = neim(&["report", "--experiment", "exp1", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error:") && err.contains("model file"), "{err}");

    let o = neim(&["train", "--experiment", "exp1", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"r\": 0}").unwrap();
    let o = neim(&["snapshots", "--config", bad.to_str().unwrap()]);
    assert!(!o.status.success());

    let cfg = small_config(dir.path(), "exp2");
    let o = neim(&["snapshots", "--config", cfg.to_str().unwrap(), "--experiment", "exp1"]);
    assert!(!o.status.success());
}

#[test]
fn training_rejects_snapshots_from_another_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = small_config(dir.path(), "exp1");
    let mut cfg = RunConfig::load(&cfg_path, Experiment::Exp1).unwrap();
    cfg.out_dir = dir.path().join("out");
    cmd_snapshots(&cfg).unwrap();
    let mut other = RunConfig::load(&cfg_path, Experiment::Exp1).unwrap();
    other.experiment = Experiment::Exp2;
    other.out_dir = cfg.out_dir.clone();
    assert!(cmd_train(&other).is_err());
}
