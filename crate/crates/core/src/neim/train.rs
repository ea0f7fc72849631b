use serde::{Deserialize, Serialize};

use super::model::{ModeKind, NeimMode, NeimModel};
use super::theta::{error_quadrature, orthogonalize_targets, solve_theta, ExpansionState};
use super::{build_training_grid, finalize_theta, InterpolationMethod, NeimError, TrainingGrid, WeightScheme};
use crate::mlp::{train, Mlp, MlpConfig, WeightedDataset};
use crate::pod::{PodBasis, SnapshotSet};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingCriteria<T> {
    /// Stop once the largest error quadrature is at most `tol`.
    pub tol: T,
    pub max_modes: usize,
    /// Stop when the relative decrease of the largest error quadrature is
    /// below this fraction for two consecutive steps; `0` disables the rule.
    pub elbow_fraction: T,
}

impl<T: Real> Default for StoppingCriteria<T> {
    fn default() -> Self {
        Self {
            tol: T::zero(),
            max_modes: usize::MAX,
            elbow_fraction: T::zero(),
        }
    }
}

impl<T: Real> StoppingCriteria<T> {
    pub fn with_max_modes(max_modes: usize) -> Self {
        Self {
            max_modes,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), NeimError> {
        if !(self.tol >= T::zero()) || self.max_modes == 0 || !(self.elbow_fraction >= T::zero() && self.elbow_fraction < T::one()) {
            return Err(NeimError::Config(format!("invalid stopping criteria {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeimConfig<T> {
    pub weights: WeightScheme<T>,
    pub stop: StoppingCriteria<T>,
    /// Template for every network; step `j` uses seed `net.seed + j − 1`.
    pub net: MlpConfig<T>,
    pub exact_mode: bool,
    pub interpolation: InterpolationMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Tolerance,
    MaxModes,
    Elbow,
    /// As many modes as the reduced dimension.
    RankCap,
    /// The orthogonalized target at the selected sample vanished, or no
    /// training sample was left.
    BasisExhausted,
    ParametersExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord<T> {
    pub step: usize,
    pub selected_index: usize,
    pub selected_param: Vec<T>,
    /// Error quadrature at the selected parameter before this step.
    pub selection_error: T,
    /// Error quadrature at every training parameter after this step.
    pub errors: Vec<T>,
    pub max_error: T,
    /// Samples dropped from this step's dataset because their target vanished.
    pub skipped_samples: Vec<usize>,
    pub final_loss: Option<T>,
    /// `N̂(ṽ_j; μ_j)` for every training index `j` after this step.
    pub in_sample: Vec<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog<T> {
    pub initial_errors: Vec<T>,
    pub steps: Vec<StepRecord<T>>,
    pub termination: Termination,
}

impl<T: Real> TrainingLog<T> {
    /// Largest error quadrature before any step, then after each step.
    pub fn max_errors(&self) -> Vec<T> {
        let first = self.initial_errors.iter().fold(T::zero(), |a, &b| a.max(b));
        std::iter::once(first).chain(self.steps.iter().map(|s| s.max_error)).collect()
    }

    /// Error quadratures at parameter `j`, before any step and after each step.
    pub fn errors_at(&self, j: usize) -> Vec<T> {
        std::iter::once(self.initial_errors[j]).chain(self.steps.iter().map(|s| s.errors[j])).collect()
    }

    pub(super) fn truncated(&self, k: usize) -> Self {
        Self {
            initial_errors: self.initial_errors.clone(),
            steps: self.steps[..k].to_vec(),
            termination: if k < self.steps.len() {
                Termination::MaxModes
            } else {
                self.termination
            },
        }
    }
}

/// Orthogonalized targets of every step: `trace[s][i]` is `z⁽ˢ⁺¹⁾(μᵢ)`, or
/// `None` for a sample whose target vanished.
pub type TrainingTrace<T> = Vec<Vec<Option<Vec<T>>>>;

pub struct Trainer<'a, T> {
    grid: &'a TrainingGrid<T>,
    config: &'a NeimConfig<T>,
}

/// Builds the training grid from snapshots and trains a model on it.
pub fn neim_train<T, F>(
    snapshots: &SnapshotSet<T>,
    basis: &PodBasis<T>,
    nonlinearity: F,
    config: &NeimConfig<T>,
) -> Result<NeimModel<T>, NeimError>
where
    T: Real,
    F: FnMut(&[T], &[T]) -> Vec<T>,
{
    let grid = build_training_grid(snapshots, basis, nonlinearity)?;
    Trainer::new(&grid, config).run()
}

impl<'a, T: Real> Trainer<'a, T> {
    pub fn new(grid: &'a TrainingGrid<T>, config: &'a NeimConfig<T>) -> Self {
        Self { grid, config }
    }

    pub fn run(&self) -> Result<NeimModel<T>, NeimError> {
        self.run_with_trace().map(|(model, _)| model)
    }

    pub fn run_with_trace(&self) -> Result<(NeimModel<T>, TrainingTrace<T>), NeimError> {
        let grid = self.grid;
        let cfg = self.config;
        let (m, r) = (grid.m(), grid.r());
        cfg.weights.validate()?;
        cfg.stop.validate()?;
        if !cfg.exact_mode {
            cfg.net.validate().map_err(|e| NeimError::Config(e.to_string()))?;
            if cfg.net.input_size() != r || cfg.net.output_size() != r {
                return Err(NeimError::Config(format!(
                    "network maps {} -> {}, reduced dimension is {r}",
                    cfg.net.input_size(),
                    cfg.net.output_size()
                )));
            }
        }
        let params = grid.params();
        let states = grid.reduced_states();
        let w_e = &cfg.weights.error;

        let mut state = ExpansionState::empty(m);
        let mut errors: Vec<T> = (0..m).map(|j| error_quadrature(grid, &state, w_e, j)).collect();
        let initial_errors = errors.clone();
        let mut excluded = vec![false; m];
        let mut modes: Vec<NeimMode<T>> = Vec::new();
        let mut theta_history = Vec::new();
        let mut steps: Vec<StepRecord<T>> = Vec::new();
        let mut trace: TrainingTrace<T> = Vec::new();
        let mut prev_max = max_of(&errors);
        let mut slow_steps = 0;

        let termination = loop {
            if prev_max <= cfg.stop.tol {
                break Termination::Tolerance;
            }
            if modes.len() >= cfg.stop.max_modes {
                break Termination::MaxModes;
            }
            if modes.len() >= r {
                break Termination::RankCap;
            }
            let Some(sel) = argmax_available(&errors, &excluded) else {
                break Termination::ParametersExhausted;
            };
            let step = modes.len() + 1;

            let mut targets: Vec<Option<Vec<T>>> = Vec::with_capacity(m);
            let mut skipped = Vec::new();
            for i in 0..m {
                let priors: Vec<Vec<T>> = state.mode_values.iter().map(|v| v[i].clone()).collect();
                match orthogonalize_targets(grid.g(i, sel), &priors) {
                    Ok(z) => targets.push(Some(z)),
                    Err(NeimError::Degenerate) => {
                        targets.push(None);
                        skipped.push(i);
                    }
                    Err(e) => return Err(e),
                }
            }
            let Some(exact_vector) = targets[sel].clone() else {
                break Termination::BasisExhausted;
            };

            let (kind, final_loss) = if cfg.exact_mode {
                (ModeKind::Constant(exact_vector.clone()), None)
            } else {
                let tw = cfg.weights.training.row(params, sel);
                let mut inputs = Vec::new();
                let mut outputs = Vec::new();
                let mut weights = Vec::new();
                for i in 0..m {
                    if let (Some(z), true) = (&targets[i], tw[i] > T::zero()) {
                        inputs.push(states[i].clone());
                        outputs.push(z.clone());
                        weights.push(tw[i]);
                    }
                }
                if weights.is_empty() {
                    break Termination::BasisExhausted;
                }
                let data = WeightedDataset::new(inputs, outputs, weights).map_err(|e| NeimError::Network { step, source: e })?;
                let mut net_cfg = cfg.net.clone();
                net_cfg.seed = cfg.net.seed.wrapping_add(step as u64 - 1);
                let net = Mlp::init(&net_cfg).map_err(|e| NeimError::Network { step, source: e })?;
                let out = train(&net, &data, &net_cfg).map_err(|e| NeimError::Network { step, source: e })?;
                (ModeKind::Network(out.net), Some(out.final_loss))
            };

            let mode = NeimMode {
                step,
                selected_index: sel,
                selected_param: params[sel].clone(),
                kind,
                exact_vector,
            };
            state.mode_values.push(states.iter().map(|v| mode.eval(v)).collect());
            modes.push(mode);
            for j in 0..m {
                state.theta[j] = solve_theta(grid, &state.mode_values, w_e, j);
            }
            let selection_error = errors[sel];
            errors = (0..m).map(|j| error_quadrature(grid, &state, w_e, j)).collect();
            excluded[sel] = true;
            let max_error = max_of(&errors);
            steps.push(StepRecord {
                step,
                selected_index: sel,
                selected_param: params[sel].clone(),
                selection_error,
                errors: errors.clone(),
                max_error,
                skipped_samples: skipped,
                final_loss,
                in_sample: (0..m).map(|j| state.approx(j, j, r)).collect(),
            });
            theta_history.push(state.theta.clone());
            trace.push(targets);

            if cfg.stop.elbow_fraction > T::zero() {
                let decrease = if prev_max > T::zero() {
                    (prev_max - max_error) / prev_max
                } else {
                    T::zero()
                };
                slow_steps = if decrease < cfg.stop.elbow_fraction { slow_steps + 1 } else { 0 };
            }
            prev_max = max_error;
            if slow_steps >= 2 && prev_max > cfg.stop.tol {
                break Termination::Elbow;
            }
        };

        let interpolants = match theta_history.last() {
            Some(table) => Some(finalize_theta(table, params, cfg.interpolation)?),
            None => None,
        };
        let model = NeimModel {
            r,
            params: params.to_vec(),
            modes,
            theta_history,
            interpolation: cfg.interpolation,
            interpolants,
            weights: cfg.weights,
            exact_mode: cfg.exact_mode,
            log: TrainingLog {
                initial_errors,
                steps,
                termination,
            },
        };
        Ok((model, trace))
    }
}

fn max_of<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &b| a.max(b))
}

fn argmax_available<T: Real>(errors: &[T], excluded: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (j, &e) in errors.iter().enumerate() {
        if excluded[j] {
            continue;
        }
        if best.is_none_or(|b| e > errors[b]) {
            best = Some(j);
        }
    }
    best
}
