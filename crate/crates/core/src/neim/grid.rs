use serde::{Deserialize, Serialize};

use super::NeimError;
use crate::pod::{PodBasis, SnapshotSet};
use crate::scalar::Real;

/// All reduced nonlinearity values `g[i][j] = U_rᵀ N(v_i; μ_j)` over the
/// training snapshots `v_i` and training parameters `μ_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingGrid<T> {
    params: Vec<Vec<T>>,
    reduced_states: Vec<Vec<T>>,
    r: usize,
    /// `(i * m + j) * r ..` holds `g[i][j]`.
    g: Vec<T>,
}

/// Evaluates the nonlinearity at every (snapshot, parameter) pair, `m²` calls.
pub fn build_training_grid<T, F>(
    snapshots: &SnapshotSet<T>,
    basis: &PodBasis<T>,
    mut nonlinearity: F,
) -> Result<TrainingGrid<T>, NeimError>
where
    T: Real,
    F: FnMut(&[T], &[T]) -> Vec<T>,
{
    if snapshots.dim() != basis.n() {
        return Err(NeimError::DimensionMismatch {
            expected: basis.n(),
            got: snapshots.dim(),
        });
    }
    let m = snapshots.len();
    let r = basis.r();
    let reduced_states = snapshots
        .snapshots()
        .iter()
        .map(|v| basis.project(v))
        .collect::<Result<Vec<_>, _>>()?;
    let mut g = Vec::with_capacity(m * m * r);
    for (i, v) in snapshots.snapshots().iter().enumerate() {
        for (j, mu) in snapshots.parameters().iter().enumerate() {
            let nl = nonlinearity(v, mu);
            if nl.len() != basis.n() {
                return Err(NeimError::DimensionMismatch {
                    expected: basis.n(),
                    got: nl.len(),
                });
            }
            if nl.iter().any(|x| !x.is_finite()) {
                return Err(NeimError::NonFinite { i, j });
            }
            g.extend(basis.project(&nl)?);
        }
    }
    Ok(TrainingGrid {
        params: snapshots.parameters().to_vec(),
        reduced_states,
        r,
        g,
    })
}

impl<T: Real> TrainingGrid<T> {
    /// Assembles a grid from explicit values; `table[i][j]` is `g[i][j]`.
    pub fn from_parts(params: Vec<Vec<T>>, reduced_states: Vec<Vec<T>>, table: Vec<Vec<Vec<T>>>) -> Result<Self, NeimError> {
        let m = params.len();
        if m == 0 {
            return Err(NeimError::InvalidGrid("no training parameters".into()));
        }
        if reduced_states.len() != m || table.len() != m {
            return Err(NeimError::InvalidGrid(format!(
                "{m} parameters, {} states, {} table rows",
                reduced_states.len(),
                table.len()
            )));
        }
        let r = reduced_states[0].len();
        if r == 0 || reduced_states.iter().any(|s| s.len() != r) {
            return Err(NeimError::InvalidGrid("reduced states must share a positive length".into()));
        }
        let p = params[0].len();
        if p == 0 || params.iter().any(|mu| mu.len() != p) {
            return Err(NeimError::InvalidGrid("parameters must share a positive length".into()));
        }
        let mut g = Vec::with_capacity(m * m * r);
        for (i, row) in table.into_iter().enumerate() {
            if row.len() != m {
                return Err(NeimError::InvalidGrid(format!("table row {i} has {} entries", row.len())));
            }
            for (j, cell) in row.into_iter().enumerate() {
                if cell.len() != r {
                    return Err(NeimError::DimensionMismatch {
                        expected: r,
                        got: cell.len(),
                    });
                }
                if cell.iter().any(|x| !x.is_finite()) {
                    return Err(NeimError::NonFinite { i, j });
                }
                g.extend(cell);
            }
        }
        if reduced_states.iter().chain(&params).flatten().any(|x| !x.is_finite()) {
            return Err(NeimError::InvalidGrid("non-finite state or parameter".into()));
        }
        Ok(Self {
            params,
            reduced_states,
            r,
            g,
        })
    }

    pub fn m(&self) -> usize {
        self.params.len()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn params(&self) -> &[Vec<T>] {
        &self.params
    }

    pub fn reduced_states(&self) -> &[Vec<T>] {
        &self.reduced_states
    }

    /// `U_rᵀ N(v_i; μ_j)`
    #[inline]
    pub fn g(&self, i: usize, j: usize) -> &[T] {
        let start = (i * self.m() + j) * self.r;
        &self.g[start..start + self.r]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pod::{compute_pod, Truncation};

    fn setup() -> (SnapshotSet<f64>, PodBasis<f64>) {
        let snaps = vec![vec![1.0, 0.0, 2.0], vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 0.0]];
        let s = SnapshotSet::from_scalar_params(&[1.0, 1.5, 2.0], snaps).unwrap();
        let b = compute_pod(&s, Truncation::Rank(2)).unwrap();
        (s, b)
    }

    #[test]
    fn zero_nonlinearity_gives_zero_grid() {
        let (s, b) = setup();
        let grid = build_training_grid(&s, &b, |v, _| vec![0.0; v.len()]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(grid.g(i, j), &[0.0, 0.0]);
            }
        }
    }

    #[test]
    fn identity_nonlinearity_is_parameter_independent() {
        let (s, b) = setup();
        let mut calls = 0;
        let grid = build_training_grid(&s, &b, |v, _| {
            calls += 1;
            v.to_vec()
        })
        .unwrap();
        assert_eq!(calls, 9);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(grid.g(i, j), grid.reduced_states()[i].as_slice());
            }
        }
    }

    #[test]
    fn non_finite_value_names_the_pair() {
        let (s, b) = setup();
        let err = build_training_grid(&s, &b, |v, mu| {
            if mu[0] == 1.5 && v[0] == 1.0 && v[2] == 0.0 {
                vec![f64::NAN; 3]
            } else {
                vec![0.0; 3]
            }
        })
        .unwrap_err();
        assert!(matches!(err, NeimError::NonFinite { i: 2, j: 1 }));
    }

    #[test]
    fn from_parts_validates() {
        let ok = TrainingGrid::from_parts(vec![vec![0.0]], vec![vec![1.0]], vec![vec![vec![2.0]]]).unwrap();
        assert_eq!(ok.g(0, 0), &[2.0]);
        assert!(TrainingGrid::<f64>::from_parts(vec![vec![0.0]], vec![vec![1.0]], vec![vec![vec![2.0, 1.0]]]).is_err());
        assert!(TrainingGrid::<f64>::from_parts(vec![], vec![], vec![]).is_err());
    }
}
