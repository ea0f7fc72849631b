use serde::{Deserialize, Serialize};

use super::NeimError;
use crate::scalar::Real;

/// Error weights `w_e(μ_i; μ)` used by the error quadrature and the coefficient solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ErrorWeights<T> {
    Uniform { c: T },
    Kronecker,
    Gaussian { c: T, zeta: T },
}

/// Training weights `w_t⁽ʲ⁾(μ_i)` for the network fitted at step `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TrainingWeights<T> {
    Uniform,
    KroneckerAtSelected,
    /// Weight 1 for every sample within `radius` of the selected parameter.
    Ball { radius: T },
    Gaussian { c: T, zeta: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme<T> {
    pub error: ErrorWeights<T>,
    pub training: TrainingWeights<T>,
}

fn dist_sq<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

impl<T: Real> ErrorWeights<T> {
    pub fn validate(&self) -> Result<(), NeimError> {
        let ok = match *self {
            ErrorWeights::Uniform { c } => c > T::zero() && c.is_finite(),
            ErrorWeights::Kronecker => true,
            ErrorWeights::Gaussian { c, zeta } => c > T::zero() && c.is_finite() && zeta >= T::zero() && zeta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(NeimError::Config(format!("invalid error weights {self:?}")))
        }
    }

    /// `w_e(μ_i; μ_j)` for training parameters indexed `i` and `j`.
    pub fn weight(&self, params: &[Vec<T>], i: usize, j: usize) -> T {
        match *self {
            ErrorWeights::Uniform { c } => c,
            ErrorWeights::Kronecker => {
                if i == j {
                    T::one()
                } else {
                    T::zero()
                }
            }
            ErrorWeights::Gaussian { c, zeta } => c * (-zeta * dist_sq(&params[i], &params[j])).exp(),
        }
    }

    /// All weights `w_e(μ_i; μ_j)` for `i = 0..m`.
    pub fn row(&self, params: &[Vec<T>], j: usize) -> Vec<T> {
        (0..params.len()).map(|i| self.weight(params, i, j)).collect()
    }
}

impl<T: Real> TrainingWeights<T> {
    pub fn validate(&self) -> Result<(), NeimError> {
        let ok = match *self {
            TrainingWeights::Uniform | TrainingWeights::KroneckerAtSelected => true,
            TrainingWeights::Ball { radius } => radius >= T::zero() && radius.is_finite(),
            TrainingWeights::Gaussian { c, zeta } => c > T::zero() && c.is_finite() && zeta >= T::zero() && zeta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(NeimError::Config(format!("invalid training weights {self:?}")))
        }
    }

    /// Weights of every sample for a network trained at the selected index.
    /// The selected sample always receives a positive weight.
    pub fn row(&self, params: &[Vec<T>], selected: usize) -> Vec<T> {
        let centre = &params[selected];
        params
            .iter()
            .enumerate()
            .map(|(i, mu)| match *self {
                TrainingWeights::Uniform => T::one(),
                TrainingWeights::KroneckerAtSelected => {
                    if i == selected {
                        T::one()
                    } else {
                        T::zero()
                    }
                }
                TrainingWeights::Ball { radius } => {
                    if dist_sq(mu, centre) <= radius * radius {
                        T::one()
                    } else {
                        T::zero()
                    }
                }
                TrainingWeights::Gaussian { c, zeta } => c * (-zeta * dist_sq(mu, centre)).exp(),
            })
            .collect()
    }
}

impl<T: Real> WeightScheme<T> {
    pub fn uniform() -> Self {
        Self {
            error: ErrorWeights::Uniform { c: T::one() },
            training: TrainingWeights::Uniform,
        }
    }

    pub fn validate(&self) -> Result<(), NeimError> {
        self.error.validate()?;
        self.training.validate()
    }
}
