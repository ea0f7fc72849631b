use serde::{Deserialize, Serialize};

use super::{NeimError, NeimModel};
use crate::numkit::{lstsq_svd, DenseMatrix};
use crate::scalar::{norm2, Real};

const FIT_CUTOFF: f64 = 1e-12;

/// Split of the error at one parameter into the three sources of the local
/// estimate; `total ≤ projection + training + interpolation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDecomposition<T> {
    pub mu: Vec<T>,
    /// `‖N − M̂ θ̂‖`
    pub total: T,
    /// `‖N − M_e θ_e‖`, best fit with the exact mode vectors.
    pub projection: T,
    /// `‖(M_e − M̂) θ_e‖`, network outputs against exact vectors.
    pub training: T,
    /// `‖M̂ (θ_n − θ̂)‖`, interpolated against re-solved coefficients.
    pub interpolation: T,
}

/// Decomposes the error at each of `params`.
///
/// `dense_eval(μ)` returns the reduced state `ṽ(μ)` and the exact reduced
/// nonlinearity `N(μ)`. `M_e` stacks the exact vectors of the modes, `M̂` the
/// mode outputs at `ṽ(μ)`, `θ̂` the interpolated coefficients, and `θ_e`, `θ_n`
/// the least-squares coefficients against `M_e` and `M̂`.
pub fn error_decomposition_report<T, F>(
    model: &NeimModel<T>,
    params: &[Vec<T>],
    mut dense_eval: F,
) -> Result<Vec<ErrorDecomposition<T>>, NeimError>
where
    T: Real,
    F: FnMut(&[T]) -> (Vec<T>, Vec<T>),
{
    let r = model.r();
    let exact: Vec<Vec<T>> = model.modes().iter().map(|m| m.exact_vector.clone()).collect();
    let m_e = columns_matrix(&exact, r)?;
    params
        .iter()
        .map(|mu| {
            let (reduced, nl) = dense_eval(mu);
            if nl.len() != r {
                return Err(NeimError::DimensionMismatch {
                    expected: r,
                    got: nl.len(),
                });
            }
            let theta_hat = model.theta(mu)?;
            let values = model.mode_values(&reduced)?;
            let approx = model.eval(&reduced, mu)?;
            let total = norm2(&sub(&nl, &approx));
            if values.is_empty() {
                return Ok(ErrorDecomposition {
                    mu: mu.clone(),
                    total,
                    projection: norm2(&nl),
                    training: T::zero(),
                    interpolation: T::zero(),
                });
            }
            let m_hat = columns_matrix(&values, r)?;
            let cutoff = T::lit(FIT_CUTOFF);
            let theta_e = lstsq_svd(&m_e, &nl, cutoff).map_err(|e| NeimError::Config(e.to_string()))?;
            let theta_n = lstsq_svd(&m_hat, &nl, cutoff).map_err(|e| NeimError::Config(e.to_string()))?;
            let fit_e = m_e.matvec(&theta_e);
            let projection = norm2(&sub(&nl, &fit_e));
            let training = norm2(&sub(&fit_e, &m_hat.matvec(&theta_e)));
            let interpolation = norm2(&m_hat.matvec(&sub(&theta_n, &theta_hat)));
            Ok(ErrorDecomposition {
                mu: mu.clone(),
                total,
                projection,
                training,
                interpolation,
            })
        })
        .collect()
}

fn columns_matrix<T: Real>(cols: &[Vec<T>], r: usize) -> Result<DenseMatrix<T>, NeimError> {
    if cols.is_empty() {
        return Ok(DenseMatrix::zeros(r, 0));
    }
    DenseMatrix::from_columns(cols).map_err(|e| NeimError::Config(e.to_string()))
}

fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}
