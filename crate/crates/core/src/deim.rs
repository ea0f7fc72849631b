//! Discrete empirical interpolation of a componentwise nonlinearity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numkit::{solve_linear, svd, DenseMatrix, NumError};
use crate::pod::{PodBasis, PodError, Truncation};
use crate::scalar::{argmax_abs, dot, Real};

/// Relative size below which a singular value or interpolation residual is treated as zero.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeimError {
    #[error("requested {k} interpolation points, at most {max} available")]
    InvalidCount { k: usize, max: usize },
    #[error("nonlinear snapshots are numerically dependent: sigma_{k} / sigma_1 = {ratio:e}")]
    DependentSnapshots { k: usize, ratio: f64 },
    #[error("interpolation matrix is singular at greedy step {step}")]
    Degenerate { step: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Pod(#[from] PodError),
}

/// DEIM indices and the factors needed to evaluate `U_rᵀ V_k (PᵀV_k)⁻¹ PᵀN` online.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeimModel<T> {
    v_k: DenseMatrix<T>,
    indices: Vec<usize>,
    /// `r × k`
    projector: DenseMatrix<T>,
    /// `k × r`
    selected_rows_of_u: DenseMatrix<T>,
}

/// Greedy interpolation indices for the columns of `v`.
///
/// The first index maximizes `|v₁|`; each later one maximizes the residual of
/// interpolating the next column at the indices chosen so far. Ties go to the
/// smallest index.
pub fn greedy_indices<T: Real>(v: &DenseMatrix<T>) -> Result<Vec<usize>, DeimError> {
    let k = v.cols();
    let mut indices: Vec<usize> = Vec::with_capacity(k);
    for l in 0..k {
        let col = v.column(l);
        let residual = if l == 0 {
            col
        } else {
            let m = v.select_rows(&indices).leading_columns(l);
            let rhs: Vec<T> = indices.iter().map(|&i| col[i]).collect();
            let c = solve_linear(&m, &rhs).map_err(|_| DeimError::Degenerate { step: l })?;
            let mut r = col;
            for i in 0..v.rows() {
                r[i] -= dot(&v.row(i)[..l], &c);
            }
            r
        };
        let p = argmax_abs(&residual).ok_or(DeimError::Degenerate { step: l })?;
        let scale = v.column(l).iter().fold(T::zero(), |a, x| a.max(x.abs()));
        if residual[p].abs() <= T::lit(DEGENERACY_TOL) * scale || indices.contains(&p) {
            return Err(DeimError::Degenerate { step: l });
        }
        indices.push(p);
    }
    Ok(indices)
}

/// Builds a DEIM model of size `k` from nonlinear snapshots and the state basis.
///
/// The interpolation basis is the leading `k` POD modes of the snapshots; the
/// snapshots count as dependent when `σ_k / σ₁` is at machine precision.
pub fn deim_select<T: Real>(
    nonlinear_snapshots: &[Vec<T>],
    k: usize,
    basis: &PodBasis<T>,
) -> Result<DeimModel<T>, DeimError> {
    let count = nonlinear_snapshots.len();
    let n = nonlinear_snapshots.first().map_or(0, Vec::len);
    if k == 0 || k > count || k > n {
        return Err(DeimError::InvalidCount {
            k,
            max: count.min(n),
        });
    }
    if n != basis.n() {
        return Err(DeimError::DimensionMismatch {
            expected: basis.n(),
            got: n,
        });
    }
    let pod = PodBasis::from_columns(nonlinear_snapshots, Truncation::Rank(k))?;
    let sigma = pod.sigma();
    let ratio = if sigma[0] > T::zero() {
        sigma[k - 1] / sigma[0]
    } else {
        T::zero()
    };
    if ratio <= T::epsilon() {
        return Err(DeimError::DependentSnapshots {
            k,
            ratio: ratio.to_f64().unwrap_or(0.0),
        });
    }
    DeimModel::from_basis(pod.matrix().clone(), basis)
}

impl<T: Real> DeimModel<T> {
    /// Runs the greedy selection on an explicit nonlinearity basis `v_k`.
    pub fn from_basis(v_k: DenseMatrix<T>, basis: &PodBasis<T>) -> Result<Self, DeimError> {
        if v_k.rows() != basis.n() {
            return Err(DeimError::DimensionMismatch {
                expected: basis.n(),
                got: v_k.rows(),
            });
        }
        let indices = greedy_indices(&v_k)?;
        Self::assemble(v_k, indices, basis)
    }

    fn assemble(v_k: DenseMatrix<T>, indices: Vec<usize>, basis: &PodBasis<T>) -> Result<Self, DeimError> {
        let k = indices.len();
        let ptv = v_k.select_rows(&indices);
        let s = svd(&ptv).map_err(|_| DeimError::Degenerate { step: k })?;
        if s.rank(T::lit(DEGENERACY_TOL)) < k {
            return Err(DeimError::Degenerate { step: k });
        }
        // projectorᵀ = (PᵀV_k)⁻ᵀ (U_rᵀV_k)ᵀ, solved one column of U_r at a time
        let u = basis.matrix();
        let ptv_t = ptv.transpose();
        let r = basis.r();
        let mut projector = DenseMatrix::zeros(r, k);
        for j in 0..r {
            let vtu = v_k.tr_matvec(&u.column(j));
            let row = solve_linear(&ptv_t, &vtu).map_err(|e| match e {
                NumError::Singular { step } => DeimError::Degenerate { step },
                _ => DeimError::Degenerate { step: k },
            })?;
            projector.row_mut(j).copy_from_slice(&row);
        }
        let selected_rows_of_u = u.select_rows(&indices);
        Ok(Self {
            v_k,
            indices,
            projector,
            selected_rows_of_u,
        })
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn r(&self) -> usize {
        self.projector.rows()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn v_k(&self) -> &DenseMatrix<T> {
        &self.v_k
    }

    pub fn projector(&self) -> &DenseMatrix<T> {
        &self.projector
    }

    pub fn selected_rows_of_u(&self) -> &DenseMatrix<T> {
        &self.selected_rows_of_u
    }

    /// The model built from the first `k` basis columns; greedy indices are nested.
    pub fn truncated(&self, k: usize, basis: &PodBasis<T>) -> Result<Self, DeimError> {
        if k == 0 || k > self.k() {
            return Err(DeimError::InvalidCount { k, max: self.k() });
        }
        Self::assemble(self.v_k.leading_columns(k), self.indices[..k].to_vec(), basis)
    }

    /// Interpolation coefficients `(PᵀV_k)⁻¹ PᵀN` of a full nonlinearity vector.
    pub fn coefficients(&self, nonlinearity: &[T]) -> Result<Vec<T>, DeimError> {
        if nonlinearity.len() != self.v_k.rows() {
            return Err(DeimError::DimensionMismatch {
                expected: self.v_k.rows(),
                got: nonlinearity.len(),
            });
        }
        let rhs: Vec<T> = self.indices.iter().map(|&i| nonlinearity[i]).collect();
        solve_linear(&self.v_k.select_rows(&self.indices), &rhs)
            .map_err(|_| DeimError::Degenerate { step: self.k() })
    }

    /// `N − V_k (PᵀV_k)⁻¹ PᵀN`
    pub fn residual(&self, nonlinearity: &[T]) -> Result<Vec<T>, DeimError> {
        let c = self.coefficients(nonlinearity)?;
        let approx = self.v_k.matvec(&c);
        Ok(nonlinearity.iter().zip(&approx).map(|(&a, &b)| a - b).collect())
    }

    /// Reduced nonlinearity from the `k` sampled rows.
    ///
    /// `nl_rows(i, v_i, mu)` evaluates the nonlinearity at row `i` given the
    /// lifted state value there; it is called exactly `k` times.
    pub fn eval<E, F>(&self, basis: &PodBasis<T>, reduced: &[T], mu: &[T], mut nl_rows: F) -> Result<Vec<T>, E>
    where
        E: From<DeimError>,
        F: FnMut(usize, T, &[T]) -> Result<T, E>,
    {
        if basis.r() != self.r() || basis.n() != self.v_k.rows() {
            return Err(DeimError::DimensionMismatch {
                expected: self.r(),
                got: basis.r(),
            }
            .into());
        }
        if reduced.len() != self.r() {
            return Err(DeimError::DimensionMismatch {
                expected: self.r(),
                got: reduced.len(),
            }
            .into());
        }
        let lifted = self.selected_rows_of_u.matvec(reduced);
        let mut sampled = Vec::with_capacity(self.k());
        for (&i, &vi) in self.indices.iter().zip(&lifted) {
            sampled.push(nl_rows(i, vi, mu)?);
        }
        Ok(self.projector.matvec(&sampled))
    }
}

/// Free-function form of [`DeimModel::eval`].
pub fn deim_eval<T, E, F>(model: &DeimModel<T>, basis: &PodBasis<T>, nl_rows: F, reduced: &[T], mu: &[T]) -> Result<Vec<T>, E>
where
    T: Real,
    E: From<DeimError>,
    F: FnMut(usize, T, &[T]) -> Result<T, E>,
{
    model.eval(basis, reduced, mu, nl_rows)
}
