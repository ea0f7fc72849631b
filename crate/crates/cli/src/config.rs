use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use neim_core::mlp::MlpConfig;
use neim_core::neim::{ErrorWeights, InterpolationMethod, NeimConfig, StoppingCriteria, TrainingWeights, WeightScheme};
use neim_core::testbeds::{DEFAULT_H_INV_SQ, DEFAULT_M, DEFAULT_N, DEFAULT_TEST_COUNT};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    /// Poisson problem with a parameterized forcing.
    Exp1,
    /// Semilinear problem with an exponential reaction term.
    Exp2,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Exp1 => "exp1",
            Experiment::Exp2 => "exp2",
        }
    }
}

/// Hyperparameters shared by every network of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub lr_decay_factor: f64,
    /// Epochs between learning-rate decays; `None` means a fifth of the run.
    pub lr_decay_every: Option<usize>,
}

impl NetSpec {
    pub fn mlp_config(&self, r: usize, seed: u64) -> MlpConfig<f64> {
        let mut cfg = MlpConfig::new(r, &self.hidden, self.epochs, seed);
        cfg.learning_rate = self.learning_rate;
        cfg.lr_decay_factor = self.lr_decay_factor;
        if let Some(every) = self.lr_decay_every {
            cfg.lr_decay_every = every;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub h_inv_sq: f64,
    /// Number of training parameters.
    pub m: usize,
    pub test_count: usize,
    /// Reduced dimension.
    pub r: usize,
    /// Expansion sizes evaluated by the report, for every method.
    pub mode_counts: Vec<usize>,
    pub weights: WeightScheme<f64>,
    pub net: NetSpec,
    pub stop: StoppingCriteria<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub interpolation: InterpolationMethod,
    /// Also train the constant-vector twin of the expansion.
    pub exact_mode: bool,
}

impl RunConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let (r, weights, net, modes) = match experiment {
            Experiment::Exp1 => (
                30,
                WeightScheme {
                    error: ErrorWeights::Uniform { c: 1.0 },
                    training: TrainingWeights::Uniform,
                },
                NetSpec {
                    hidden: vec![1],
                    epochs: 20000,
                    learning_rate: 1e-2,
                    lr_decay_factor: 0.5,
                    lr_decay_every: None,
                },
                30,
            ),
            Experiment::Exp2 => (
                20,
                WeightScheme {
                    error: ErrorWeights::Kronecker,
                    training: TrainingWeights::Uniform,
                },
                NetSpec {
                    hidden: vec![50],
                    epochs: 10000,
                    learning_rate: 1e-3,
                    lr_decay_factor: 0.5,
                    lr_decay_every: None,
                },
                10,
            ),
        };
        Self {
            experiment,
            n: DEFAULT_N,
            h_inv_sq: DEFAULT_H_INV_SQ,
            m: DEFAULT_M,
            test_count: DEFAULT_TEST_COUNT,
            r,
            mode_counts: (1..=modes).collect(),
            weights,
            net,
            stop: StoppingCriteria::with_max_modes(modes),
            seed: 0,
            out_dir: PathBuf::from("out"),
            interpolation: InterpolationMethod::CubicSpline,
            exact_mode: false,
        }
    }

    /// Defaults for the experiment named in `overrides` (or `fallback`), with
    /// every field present in `overrides` replacing the default.
    pub fn from_overrides(fallback: Experiment, overrides: &Value) -> Result<Self> {
        let Value::Object(fields) = overrides else {
            bail!("configuration must be a JSON object");
        };
        let experiment = match fields.get("experiment") {
            Some(v) => serde_json::from_value(v.clone()).context("invalid experiment")?,
            None => fallback,
        };
        let mut merged = serde_json::to_value(Self::defaults(experiment))?;
        let target = merged.as_object_mut().expect("config serializes to an object");
        for (k, v) in fields {
            if !target.contains_key(k) {
                bail!("unknown configuration field `{k}`");
            }
            target.insert(k.clone(), v.clone());
        }
        let cfg: Self = serde_json::from_value(merged).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, fallback: Experiment) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Self::from_overrides(fallback, &value)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || self.m == 0 || self.test_count == 0 {
            bail!("need n >= 3, m >= 1 and a nonempty test set");
        }
        if self.r == 0 || self.r > self.m.min(self.n) {
            bail!("reduced dimension {} must lie in 1..={}", self.r, self.m.min(self.n));
        }
        if self.mode_counts.contains(&0) {
            bail!("mode counts must be positive");
        }
        self.weights.validate()?;
        self.stop.validate()?;
        self.neim_config(false).net.validate()?;
        Ok(())
    }

    pub fn neim_config(&self, exact_mode: bool) -> NeimConfig<f64> {
        NeimConfig {
            weights: self.weights,
            stop: self.stop,
            net: self.net.mlp_config(self.r, self.seed),
            exact_mode,
            interpolation: self.interpolation,
        }
    }

    pub fn snapshots_path(&self) -> PathBuf {
        self.out_dir.join("snapshots.csv")
    }

    pub fn model_path(&self) -> PathBuf {
        self.out_dir.join("model.json")
    }

    pub fn training_log_path(&self) -> PathBuf {
        self.out_dir.join("training_log.csv")
    }

    pub fn errors_path(&self) -> PathBuf {
        self.out_dir.join("errors.csv")
    }

    pub fn per_parameter_path(&self) -> PathBuf {
        self.out_dir.join("per_parameter_errors.csv")
    }
}
