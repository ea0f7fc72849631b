use std::path::Path;

use anyhow::{bail, Context, Result};
use neim_core::neim::NeimModel;
use neim_core::pod::SnapshotSet;

use crate::config::{Experiment, RunConfig};
use crate::pipeline::Report;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Metadata carried in the first header cell of a snapshot file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotHeader {
    pub experiment: String,
    pub n: usize,
    pub m: usize,
    pub version: String,
}

impl SnapshotHeader {
    fn cell(&self) -> String {
        format!("mu;experiment={};n={};m={};version={}", self.experiment, self.n, self.m, self.version)
    }

    fn parse(cell: &str) -> Result<Self> {
        let mut parts = cell.split(';');
        if parts.next() != Some("mu") {
            bail!("snapshot header must start with `mu`, found `{cell}`");
        }
        let (mut experiment, mut n, mut m, mut version) = (None, None, None, None);
        for part in parts {
            let (k, v) = part.split_once('=').with_context(|| format!("malformed header entry `{part}`"))?;
            match k {
                "experiment" => experiment = Some(v.to_string()),
                "n" => n = Some(v.parse().context("header n")?),
                "m" => m = Some(v.parse().context("header m")?),
                "version" => version = Some(v.to_string()),
                _ => bail!("unknown header entry `{k}`"),
            }
        }
        match (experiment, n, m, version) {
            (Some(experiment), Some(n), Some(m), Some(version)) => Ok(Self { experiment, n, m, version }),
            _ => bail!("snapshot header `{cell}` is incomplete"),
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn create_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

/// One row per parameter: the parameter, then the solution entries.
pub fn write_snapshots(path: &Path, experiment: Experiment, set: &SnapshotSet<f64>) -> Result<()> {
    let header = SnapshotHeader {
        experiment: experiment.name().to_string(),
        n: set.dim(),
        m: set.len(),
        version: VERSION.to_string(),
    };
    let mut w = create_writer(path)?;
    let mut head = vec![header.cell()];
    head.extend((1..=set.dim()).map(|i| format!("v{i}")));
    w.write_record(&head)?;
    for (mu, v) in set.parameters().iter().zip(set.snapshots()) {
        let row: Vec<String> = std::iter::once(fmt(mu[0])).chain(v.iter().map(|&x| fmt(x))).collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshots(path: &Path) -> Result<(SnapshotHeader, SnapshotSet<f64>)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut records = r.records();
    let head = records.next().context("snapshot file is empty")??;
    let header = SnapshotHeader::parse(head.get(0).unwrap_or(""))?;
    if head.len() != header.n + 1 {
        bail!("header declares n={} but has {} solution columns", header.n, head.len() - 1);
    }
    let mut params = Vec::new();
    let mut sols = Vec::new();
    for (line, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != header.n + 1 {
            bail!("row {} has {} columns, expected {}", line + 2, rec.len(), header.n + 1);
        }
        let vals = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("row {}", line + 2))?;
        params.push(vals[0]);
        sols.push(vals[1..].to_vec());
    }
    if params.len() != header.m {
        bail!("header declares m={} but file has {} rows", header.m, params.len());
    }
    Ok((header, SnapshotSet::from_scalar_params(&params, sols)?))
}

/// Per-step record of every trained expansion.
pub fn write_training_log(path: &Path, models: &[(&str, &NeimModel<f64>)]) -> Result<()> {
    let mut w = create_writer(path)?;
    w.write_record([
        "method",
        "step",
        "selected_index",
        "selected_param",
        "selection_error",
        "max_error",
        "final_loss",
        "skipped_samples",
    ])?;
    for (name, model) in models {
        for s in &model.log().steps {
            let skipped: Vec<String> = s.skipped_samples.iter().map(|i| i.to_string()).collect();
            w.write_record([
                name.to_string(),
                s.step.to_string(),
                s.selected_index.to_string(),
                fmt(s.selected_param[0]),
                fmt(s.selection_error),
                fmt(s.max_error),
                s.final_loss.map(fmt).unwrap_or_default(),
                skipped.join(" "),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_report(cfg: &RunConfig, report: &Report) -> Result<()> {
    let mut w = create_writer(&cfg.errors_path())?;
    w.write_record(["method", "mode_count", "avg_abs_error"])?;
    for row in &report.summary {
        w.write_record([row.method.clone(), row.mode_count.to_string(), fmt(row.avg_abs_error)])?;
    }
    w.flush()?;
    let mut w = create_writer(&cfg.per_parameter_path())?;
    w.write_record(["method", "mode_count", "mu", "abs_error"])?;
    for row in &report.per_parameter {
        w.write_record([row.method.clone(), row.mode_count.to_string(), fmt(row.mu), fmt(row.abs_error)])?;
    }
    w.flush()?;
    Ok(())
}
