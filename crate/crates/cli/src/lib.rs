//! Snapshot generation, surrogate training and error reports for the
//! finite-difference benchmark problems.

pub mod config;
pub mod csvio;
pub mod pipeline;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use neim_core::neim::ModelFile;

pub use config::{Experiment, NetSpec, RunConfig};
pub use pipeline::{evaluate, generate_snapshots, train_models, Problem, Report, Trained};

/// Writes the snapshot CSV and returns its path.
pub fn cmd_snapshots(cfg: &RunConfig) -> Result<PathBuf> {
    let set = generate_snapshots(cfg)?;
    let path = cfg.snapshots_path();
    csvio::write_snapshots(&path, cfg.experiment, &set)?;
    Ok(path)
}

/// Trains every surrogate from the stored snapshots, writing the model file
/// and the training log.
pub fn cmd_train(cfg: &RunConfig) -> Result<Trained> {
    let path = cfg.snapshots_path();
    if !path.exists() {
        bail!("no snapshots at {}; run `snapshots` first", path.display());
    }
    let (header, set) = csvio::read_snapshots(&path)?;
    if header.experiment != cfg.experiment.name() {
        bail!("snapshots were generated for {}, configuration is {}", header.experiment, cfg.experiment.name());
    }
    let trained = train_models(cfg, &set)?;
    trained.file.save(cfg.model_path())?;
    let mut logs = Vec::new();
    if let Some(m) = &trained.file.neim {
        logs.push(("neim", m));
    }
    if let Some(m) = &trained.file.neim_exact {
        logs.push(("neim_exact", m));
    }
    csvio::write_training_log(&cfg.training_log_path(), &logs)?;
    Ok(trained)
}

/// Evaluates the stored surrogates over the test sweep and writes the tables.
pub fn cmd_report(cfg: &RunConfig) -> Result<Report> {
    let path = cfg.model_path();
    if !path.exists() {
        bail!("no model file at {}; run `train` first", path.display());
    }
    let file = ModelFile::<f64>::load(&path).with_context(|| format!("loading {}", path.display()))?;
    let report = evaluate(cfg, &file)?;
    csvio::write_report(cfg, &report)?;
    Ok(report)
}
