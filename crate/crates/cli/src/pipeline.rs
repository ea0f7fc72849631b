use anyhow::{bail, Context, Result};
use neim_core::deim::{deim_select, DeimError, DeimModel};
use neim_core::neim::{build_training_grid, ModelFile, NeimModel, Trainer, TrainingGrid, TrainingTrace};
use neim_core::pod::{compute_pod, PodBasis, SnapshotSet, Truncation};
use neim_core::testbeds::{abs_errors, parameter_grid, Exp1Problem, Exp2Problem, Grid1D, TestbedError, Testbed};

use crate::config::{Experiment, RunConfig};

/// The configured benchmark problem.
#[derive(Debug, Clone)]
pub enum Problem {
    Exp1(Exp1Problem),
    Exp2(Exp2Problem),
}

impl Problem {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let grid = Grid1D::new(cfg.n, cfg.h_inv_sq)?;
        Ok(match cfg.experiment {
            Experiment::Exp1 => Problem::Exp1(Exp1Problem::new(grid, cfg.m)),
            Experiment::Exp2 => Problem::Exp2(Exp2Problem::new(grid, cfg.m)),
        })
    }
}

impl Testbed for Problem {
    fn grid(&self) -> &Grid1D {
        match self {
            Problem::Exp1(p) => p.grid(),
            Problem::Exp2(p) => p.grid(),
        }
    }

    fn m(&self) -> usize {
        match self {
            Problem::Exp1(p) => p.m(),
            Problem::Exp2(p) => p.m(),
        }
    }

    fn solve(&self, mu: f64) -> Result<Vec<f64>, TestbedError> {
        match self {
            Problem::Exp1(p) => p.solve(mu),
            Problem::Exp2(p) => p.solve(mu),
        }
    }

    fn nonlinearity_row(&self, i: usize, v_i: f64, mu: f64) -> f64 {
        match self {
            Problem::Exp1(p) => p.nonlinearity_row(i, v_i, mu),
            Problem::Exp2(p) => p.nonlinearity_row(i, v_i, mu),
        }
    }
}

pub fn generate_snapshots(cfg: &RunConfig) -> Result<SnapshotSet<f64>> {
    Ok(Problem::new(cfg)?.snapshots()?)
}

/// Everything produced by training, including data the model file does not keep.
pub struct Trained {
    pub file: ModelFile<f64>,
    pub grid: TrainingGrid<f64>,
    pub neim_trace: TrainingTrace<f64>,
    pub exact_trace: Option<TrainingTrace<f64>>,
}

/// POD basis, DEIM, the network expansion and optionally its exact-mode twin.
pub fn train_models(cfg: &RunConfig, snapshots: &SnapshotSet<f64>) -> Result<Trained> {
    let problem = Problem::new(cfg)?;
    if snapshots.dim() != cfg.n || snapshots.len() != cfg.m {
        bail!(
            "snapshots are {}x{}, configuration expects n={} and m={}",
            snapshots.dim(),
            snapshots.len(),
            cfg.n,
            cfg.m
        );
    }
    let basis = compute_pod(snapshots, Truncation::Rank(cfg.r))?;
    let grid = build_training_grid(snapshots, &basis, |v, mu| problem.nonlinearity(v, mu[0]))?;
    let (neim, neim_trace) = Trainer::new(&grid, &cfg.neim_config(false)).run_with_trace().context("training the network expansion")?;
    let (neim_exact, exact_trace) = if cfg.exact_mode {
        let (model, trace) = Trainer::new(&grid, &cfg.neim_config(true)).run_with_trace().context("training the exact-mode expansion")?;
        (Some(model), Some(trace))
    } else {
        (None, None)
    };
    let nonlinear: Vec<Vec<f64>> = snapshots
        .snapshots()
        .iter()
        .zip(snapshots.parameters())
        .map(|(v, mu)| problem.nonlinearity(v, mu[0]))
        .collect();
    let deim = largest_deim(&nonlinear, &basis, cfg.mode_counts.iter().copied().max().unwrap_or(1))?;
    let mut file = ModelFile::new(basis);
    file.neim = Some(neim);
    file.neim_exact = neim_exact;
    file.deim = deim;
    Ok(Trained {
        file,
        grid,
        neim_trace,
        exact_trace,
    })
}

/// DEIM of size `k_max`, or of the largest size the snapshots support.
fn largest_deim(nonlinear: &[Vec<f64>], basis: &PodBasis<f64>, k_max: usize) -> Result<Option<DeimModel<f64>>> {
    let cap = k_max.min(nonlinear.len()).min(basis.n());
    for k in (1..=cap).rev() {
        match deim_select(nonlinear, k, basis) {
            Ok(model) => return Ok(Some(model)),
            Err(DeimError::DependentSnapshots { .. } | DeimError::Degenerate { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub method: String,
    pub mode_count: usize,
    pub avg_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamRow {
    pub method: String,
    pub mode_count: usize,
    pub mu: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub summary: Vec<ErrorRow>,
    pub per_parameter: Vec<ParamRow>,
}

impl Report {
    pub fn avg_error(&self, method: &str, mode_count: usize) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.method == method && r.mode_count == mode_count)
            .map(|r| r.avg_abs_error)
    }

    pub fn curve(&self, method: &str) -> Vec<(usize, f64)> {
        self.summary
            .iter()
            .filter(|r| r.method == method)
            .map(|r| (r.mode_count, r.avg_abs_error))
            .collect()
    }
}

/// Reduced states and reference values `U_rᵀ N(U_r ṽ; μ)` over the test sweep.
pub struct TestSweep {
    pub params: Vec<f64>,
    pub reduced: Vec<Vec<f64>>,
    pub reference: Vec<Vec<f64>>,
}

pub fn test_sweep(cfg: &RunConfig, basis: &PodBasis<f64>) -> Result<TestSweep> {
    let problem = Problem::new(cfg)?;
    let params = parameter_grid(cfg.test_count);
    let mut reduced = Vec::with_capacity(params.len());
    let mut reference = Vec::with_capacity(params.len());
    for &mu in &params {
        let v = basis.project(&problem.solve(mu)?)?;
        reference.push(problem.reduced_nonlinearity(basis, &v, mu)?);
        reduced.push(v);
    }
    Ok(TestSweep {
        params,
        reduced,
        reference,
    })
}

/// Average and per-parameter errors of every stored surrogate at each
/// configured mode count. A count beyond what a surrogate holds evaluates
/// the full surrogate.
pub fn evaluate(cfg: &RunConfig, file: &ModelFile<f64>) -> Result<Report> {
    let problem = Problem::new(cfg)?;
    let basis = &file.pod_basis;
    let sweep = test_sweep(cfg, basis)?;
    let mut report = Report::default();
    let index_of = |mu: f64| sweep.params.iter().position(|&p| p == mu).expect("test parameter");
    let mut record = |method: &str, k: usize, errs: Vec<f64>| {
        let avg = errs.iter().sum::<f64>() / errs.len() as f64;
        report.summary.push(ErrorRow {
            method: method.to_string(),
            mode_count: k,
            avg_abs_error: avg,
        });
        for (&mu, e) in sweep.params.iter().zip(errs) {
            report.per_parameter.push(ParamRow {
                method: method.to_string(),
                mode_count: k,
                mu,
                abs_error: e,
            });
        }
    };
    let reference = |mu: f64| -> Result<Vec<f64>, anyhow::Error> { Ok(sweep.reference[index_of(mu)].clone()) };

    if let Some(deim) = &file.deim {
        for &k in &cfg.mode_counts {
            let model = deim.truncated(k.min(deim.k()), basis)?;
            let errs = abs_errors(
                |mu| -> Result<Vec<f64>> {
                    let v = &sweep.reduced[index_of(mu)];
                    Ok(model.eval::<TestbedError, _>(basis, v, &[mu], |i, vi, p| Ok(problem.nonlinearity_row(i, vi, p[0])))?)
                },
                reference,
                &sweep.params,
            )?;
            record("deim", k, errs);
        }
    }
    for (name, model) in [("neim", &file.neim), ("neim_exact", &file.neim_exact)] {
        let Some(model) = model else { continue };
        for &k in &cfg.mode_counts {
            let errs = neim_errors(model, k, &sweep, &index_of)?;
            record(name, k, errs);
        }
    }
    Ok(report)
}

fn neim_errors(model: &NeimModel<f64>, k: usize, sweep: &TestSweep, index_of: &dyn Fn(f64) -> usize) -> Result<Vec<f64>> {
    let model = model.truncated(k.min(model.num_modes()))?;
    abs_errors(
        |mu| -> Result<Vec<f64>> { Ok(model.eval(&sweep.reduced[index_of(mu)], &[mu])?) },
        |mu| -> Result<Vec<f64>> { Ok(sweep.reference[index_of(mu)].clone()) },
        &sweep.params,
    )
}
