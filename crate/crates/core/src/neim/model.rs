use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{finalize_theta, InterpolationMethod, NeimError, ThetaInterpolants, TrainingLog, WeightScheme};
use crate::deim::DeimModel;
use crate::mlp::Mlp;
use crate::pod::PodBasis;
use crate::scalar::{axpy, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "data")]
pub enum ModeKind<T> {
    Network(Mlp<T>),
    /// Exact mode: the orthogonalized target at the selected sample.
    Constant(Vec<T>),
}

/// One term `M_{μ⁽ʲ⁾}` of the expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeimMode<T> {
    /// 1-based greedy step that produced this mode.
    pub step: usize,
    pub selected_index: usize,
    pub selected_param: Vec<T>,
    pub kind: ModeKind<T>,
    /// Orthogonalized, normalized target at the selected sample.
    pub exact_vector: Vec<T>,
}

impl<T: Real> NeimMode<T> {
    pub fn eval(&self, reduced: &[T]) -> Vec<T> {
        match &self.kind {
            ModeKind::Network(net) => net.forward_unchecked(reduced),
            ModeKind::Constant(c) => c.clone(),
        }
    }
}

/// A trained expansion with coefficient interpolants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeimModel<T> {
    pub(super) r: usize,
    pub(super) params: Vec<Vec<T>>,
    pub(super) modes: Vec<NeimMode<T>>,
    /// `theta_history[s][j]`: coefficients at parameter `j` after step `s + 1`.
    pub(super) theta_history: Vec<Vec<Vec<T>>>,
    pub(super) interpolation: InterpolationMethod,
    pub(super) interpolants: Option<ThetaInterpolants<T>>,
    pub(super) weights: WeightScheme<T>,
    pub(super) exact_mode: bool,
    pub(super) log: TrainingLog<T>,
}

impl<T: Real> NeimModel<T> {
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[NeimMode<T>] {
        &self.modes
    }

    pub fn params(&self) -> &[Vec<T>] {
        &self.params
    }

    pub fn selected_indices(&self) -> Vec<usize> {
        self.modes.iter().map(|m| m.selected_index).collect()
    }

    /// Coefficients at every training parameter for the full expansion.
    pub fn theta_table(&self) -> &[Vec<T>] {
        self.theta_history.last().map_or(&[], |t| t.as_slice())
    }

    pub fn theta_history(&self) -> &[Vec<Vec<T>>] {
        &self.theta_history
    }

    pub fn interpolation(&self) -> InterpolationMethod {
        self.interpolation
    }

    pub fn weights(&self) -> &WeightScheme<T> {
        &self.weights
    }

    pub fn is_exact_mode(&self) -> bool {
        self.exact_mode
    }

    pub fn log(&self) -> &TrainingLog<T> {
        &self.log
    }

    /// Interpolated coefficients `θ̂(μ)`.
    pub fn theta(&self, mu: &[T]) -> Result<Vec<T>, NeimError> {
        let p = self.params[0].len();
        if mu.len() != p {
            return Err(NeimError::DimensionMismatch {
                expected: p,
                got: mu.len(),
            });
        }
        Ok(self.interpolants.as_ref().map_or_else(Vec::new, |f| f.eval(mu)))
    }

    /// Outputs of every mode at `ṽ`.
    pub fn mode_values(&self, reduced: &[T]) -> Result<Vec<Vec<T>>, NeimError> {
        self.check_reduced(reduced)?;
        Ok(self.modes.iter().map(|m| m.eval(reduced)).collect())
    }

    /// `N̂(ṽ; μ) = Σᵢ θ̂ᵢ(μ) Mᵢ(ṽ)`
    pub fn eval(&self, reduced: &[T], mu: &[T]) -> Result<Vec<T>, NeimError> {
        self.check_reduced(reduced)?;
        let theta = self.theta(mu)?;
        Ok(self.combine(&theta, reduced))
    }

    /// Expansion at training parameter `j` using the coefficient table directly.
    pub fn eval_at_training(&self, reduced: &[T], j: usize) -> Result<Vec<T>, NeimError> {
        self.check_reduced(reduced)?;
        let table = self.theta_table();
        if self.modes.is_empty() {
            return Ok(vec![T::zero(); self.r]);
        }
        let theta = table.get(j).ok_or(NeimError::DimensionMismatch {
            expected: self.params.len(),
            got: j,
        })?;
        Ok(self.combine(theta, reduced))
    }

    fn combine(&self, theta: &[T], reduced: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.r];
        for (mode, &th) in self.modes.iter().zip(theta) {
            axpy(th, &mode.eval(reduced), &mut out);
        }
        out
    }

    fn check_reduced(&self, reduced: &[T]) -> Result<(), NeimError> {
        if reduced.len() != self.r {
            return Err(NeimError::DimensionMismatch {
                expected: self.r,
                got: reduced.len(),
            });
        }
        Ok(())
    }

    /// The expansion after its first `k` greedy steps.
    pub fn truncated(&self, k: usize) -> Result<Self, NeimError> {
        if k > self.modes.len() {
            return Err(NeimError::Config(format!(
                "model has {} modes, {k} requested",
                self.modes.len()
            )));
        }
        let theta_history = self.theta_history[..k].to_vec();
        let interpolants = match theta_history.last() {
            Some(table) => Some(finalize_theta(table, &self.params, self.interpolation)?),
            None => None,
        };
        Ok(Self {
            r: self.r,
            params: self.params.clone(),
            modes: self.modes[..k].to_vec(),
            theta_history,
            interpolation: self.interpolation,
            interpolants,
            weights: self.weights,
            exact_mode: self.exact_mode,
            log: self.log.truncated(k),
        })
    }

    /// Same expansion with a different coefficient interpolation.
    pub fn with_interpolation(&self, method: InterpolationMethod) -> Result<Self, NeimError> {
        let mut out = self.clone();
        out.interpolation = method;
        out.interpolants = match self.theta_history.last() {
            Some(table) => Some(finalize_theta(table, &self.params, method)?),
            None => None,
        };
        Ok(out)
    }
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Versioned JSON document holding a reduced basis and the surrogates built on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile<T> {
    pub format_version: u32,
    pub pod_basis: PodBasis<T>,
    pub neim: Option<NeimModel<T>>,
    pub neim_exact: Option<NeimModel<T>>,
    pub deim: Option<DeimModel<T>>,
}

impl<T: Real> ModelFile<T> {
    pub fn new(pod_basis: PodBasis<T>) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            pod_basis,
            neim: None,
            neim_exact: None,
            deim: None,
        }
    }

    pub fn to_json(&self) -> Result<String, NeimError> {
        serde_json::to_string(self).map_err(|e| NeimError::ModelFile(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, NeimError> {
        let doc: Self = serde_json::from_str(text).map_err(|e| NeimError::ModelFile(e.to_string()))?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(NeimError::ModelFile(format!(
                "unsupported format version {} (expected {MODEL_FORMAT_VERSION})",
                doc.format_version
            )));
        }
        Ok(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NeimError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NeimError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
