//! Proper orthogonal decomposition of a snapshot matrix.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numkit::{svd, DenseMatrix, NumError};
use crate::scalar::{argmax_abs, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PodError {
    #[error("snapshot set is empty")]
    Empty,
    #[error("invalid snapshot set: {0}")]
    InvalidSnapshots(String),
    #[error("requested rank {rank} outside 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Numerics(#[from] NumError),
}

/// Parameters `μ_j ∈ ℝᵖ` with their high-fidelity solutions `v(μ_j) ∈ ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSet<T> {
    parameters: Vec<Vec<T>>,
    snapshots: Vec<Vec<T>>,
}

impl<T: Real> SnapshotSet<T> {
    pub fn new(parameters: Vec<Vec<T>>, snapshots: Vec<Vec<T>>) -> Result<Self, PodError> {
        if parameters.is_empty() && snapshots.is_empty() {
            return Err(PodError::Empty);
        }
        if parameters.len() != snapshots.len() {
            return Err(PodError::InvalidSnapshots(format!(
                "{} parameters for {} snapshots",
                parameters.len(),
                snapshots.len()
            )));
        }
        let p = parameters[0].len();
        let n = snapshots[0].len();
        if p == 0 || n == 0 {
            return Err(PodError::InvalidSnapshots("zero-length vectors".into()));
        }
        if parameters.iter().any(|mu| mu.len() != p) || snapshots.iter().any(|v| v.len() != n) {
            return Err(PodError::InvalidSnapshots("ragged vectors".into()));
        }
        if parameters
            .iter()
            .chain(&snapshots)
            .flatten()
            .any(|x| !x.is_finite())
        {
            return Err(PodError::InvalidSnapshots("non-finite value".into()));
        }
        for (i, a) in parameters.iter().enumerate() {
            if parameters[..i].contains(a) {
                return Err(PodError::InvalidSnapshots(format!(
                    "parameter {i} duplicates an earlier one"
                )));
            }
        }
        Ok(Self {
            parameters,
            snapshots,
        })
    }

    /// Scalar parameters.
    pub fn from_scalar_params(params: &[T], snapshots: Vec<Vec<T>>) -> Result<Self, PodError> {
        Self::new(params.iter().map(|&p| vec![p]).collect(), snapshots)
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.snapshots[0].len()
    }

    pub fn parameters(&self) -> &[Vec<T>] {
        &self.parameters
    }

    pub fn snapshots(&self) -> &[Vec<T>] {
        &self.snapshots
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation<T> {
    Rank(usize),
    /// Smallest `r` whose retained energy `Σᵢ≤ᵣσᵢ² / Σσᵢ²` is at least `1 − tol`.
    Energy(T),
}

/// Leading left singular vectors of the snapshot matrix.
///
/// Each column is signed so that its largest-magnitude entry is nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PodBasis<T> {
    u_r: DenseMatrix<T>,
    sigma: Vec<T>,
    r: usize,
}

pub fn compute_pod<T: Real>(s: &SnapshotSet<T>, truncation: Truncation<T>) -> Result<PodBasis<T>, PodError> {
    PodBasis::from_columns(s.snapshots(), truncation)
}

impl<T: Real> PodBasis<T> {
    /// POD of the matrix whose columns are `columns`; no mean is subtracted.
    pub fn from_columns(columns: &[Vec<T>], truncation: Truncation<T>) -> Result<Self, PodError> {
        if columns.is_empty() {
            return Err(PodError::Empty);
        }
        let s = DenseMatrix::from_columns(columns)?;
        let n = s.rows();
        let max_rank = n.min(s.cols());
        let dec = svd(&s)?;
        let r = match truncation {
            Truncation::Rank(r) => {
                if r == 0 || r > max_rank {
                    return Err(PodError::RankOutOfRange { rank: r, max: max_rank });
                }
                r
            }
            Truncation::Energy(tol) => energy_rank(&dec.sigma, tol),
        };
        let mut u_r = dec.u.leading_columns(r);
        for k in 0..r {
            let col = u_r.column(k);
            let lead = argmax_abs(&col).expect("nonempty column");
            if col[lead] < T::zero() {
                for i in 0..n {
                    u_r[(i, k)] = -u_r[(i, k)];
                }
            }
        }
        Ok(Self {
            u_r,
            sigma: dec.sigma,
            r,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.u_r.rows()
    }

    /// All singular values of the snapshot matrix, not only the retained ones.
    pub fn sigma(&self) -> &[T] {
        &self.sigma
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.u_r
    }

    pub fn column(&self, k: usize) -> Vec<T> {
        self.u_r.column(k)
    }

    /// Same decomposition keeping only the first `r` columns.
    pub fn truncated(&self, r: usize) -> Result<Self, PodError> {
        if r == 0 || r > self.r {
            return Err(PodError::RankOutOfRange { rank: r, max: self.r });
        }
        Ok(Self {
            u_r: self.u_r.leading_columns(r),
            sigma: self.sigma.clone(),
            r,
        })
    }

    /// `U_rᵀ v`
    pub fn project(&self, v: &[T]) -> Result<Vec<T>, PodError> {
        if v.len() != self.n() {
            return Err(PodError::DimensionMismatch {
                expected: self.n(),
                got: v.len(),
            });
        }
        Ok(self.u_r.tr_matvec(v))
    }

    /// `U_r ṽ`
    pub fn lift(&self, reduced: &[T]) -> Result<Vec<T>, PodError> {
        if reduced.len() != self.r {
            return Err(PodError::DimensionMismatch {
                expected: self.r,
                got: reduced.len(),
            });
        }
        Ok(self.u_r.matvec(reduced))
    }

    /// Squared singular values beyond the retained rank.
    pub fn tail_energy(&self) -> T {
        self.sigma.iter().skip(self.r).map(|&s| s * s).sum()
    }
}

fn energy_rank<T: Real>(sigma: &[T], tol: T) -> usize {
    let total: T = sigma.iter().map(|&s| s * s).sum();
    if total == T::zero() {
        return 1;
    }
    let target = (T::one() - tol) * total;
    let mut acc = T::zero();
    for (k, &s) in sigma.iter().enumerate() {
        acc += s * s;
        if acc >= target {
            return k + 1;
        }
    }
    sigma.len()
}
