use super::{ErrorWeights, NeimError, TrainingGrid};
use crate::numkit::{lstsq_svd, solve_linear, DenseMatrix};
use crate::scalar::{axpy, dot, norm2, Real};

/// Relative norm below which a vector is treated as lying in the span of the others.
pub(crate) const SPAN_TOL: f64 = 1e-12;
/// Singular-value cutoff of the least-squares fallback in the coefficient solve.
const LSTSQ_CUTOFF: f64 = 1e-12;

/// Mode values at the training samples and the coefficient table of the
/// current expansion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpansionState<T> {
    /// `mode_values[k][i] = M_k(ṽ_i)`
    pub mode_values: Vec<Vec<Vec<T>>>,
    /// `theta[j]` holds the coefficients at training parameter `j`.
    pub theta: Vec<Vec<T>>,
}

impl<T: Real> ExpansionState<T> {
    pub fn empty(m: usize) -> Self {
        Self {
            mode_values: Vec::new(),
            theta: vec![Vec::new(); m],
        }
    }

    pub fn num_modes(&self) -> usize {
        self.mode_values.len()
    }

    /// `N̂(ṽ_i; μ_j) = Σ_k θ_k(μ_j) M_k(ṽ_i)`
    pub fn approx(&self, i: usize, j: usize, r: usize) -> Vec<T> {
        let mut out = vec![T::zero(); r];
        for (values, &th) in self.mode_values.iter().zip(&self.theta[j]) {
            axpy(th, &values[i], &mut out);
        }
        out
    }
}

/// `Σᵢ w_e(μᵢ; μ_j) ‖g[i][j] − N̂(ṽᵢ; μ_j)‖²`
pub fn error_quadrature<T: Real>(grid: &TrainingGrid<T>, state: &ExpansionState<T>, weights: &ErrorWeights<T>, j: usize) -> T {
    let params = grid.params();
    let mut total = T::zero();
    for i in 0..grid.m() {
        let w = weights.weight(params, i, j);
        if w == T::zero() {
            continue;
        }
        let approx = state.approx(i, j, grid.r());
        let e: T = grid.g(i, j).iter().zip(&approx).map(|(&a, &b)| (a - b) * (a - b)).sum();
        total += w * e;
    }
    total
}

/// Index of the largest error quadrature among parameters not yet excluded,
/// with its value. Ties go to the smallest index.
pub fn select_parameter<T: Real>(
    grid: &TrainingGrid<T>,
    state: &ExpansionState<T>,
    weights: &ErrorWeights<T>,
    excluded: &[bool],
) -> Result<(usize, T), NeimError> {
    let mut best: Option<(usize, T)> = None;
    for j in 0..grid.m() {
        if excluded.get(j).copied().unwrap_or(false) {
            continue;
        }
        let e = error_quadrature(grid, state, weights, j);
        if best.is_none_or(|(_, b)| e > b) {
            best = Some((j, e));
        }
    }
    best.ok_or(NeimError::ParametersExhausted)
}

/// Gram-Schmidt of `y` against the prior mode values at one sample, then
/// normalization.
///
/// The priors are first orthonormalized among themselves so the result is
/// orthogonal to every prior value even when the priors are not mutually
/// orthogonal; for orthogonal priors this is the classical sequential update.
/// Two passes are made for numerical orthogonality. Returns
/// [`NeimError::Degenerate`] when the residual is negligible relative to `y`.
pub fn orthogonalize_targets<T: Real>(y: &[T], priors: &[Vec<T>]) -> Result<Vec<T>, NeimError> {
    let tol = T::lit(SPAN_TOL);
    let ny = norm2(y);
    if !ny.is_finite() || ny == T::zero() {
        return Err(NeimError::Degenerate);
    }
    let mut q: Vec<Vec<T>> = Vec::with_capacity(priors.len());
    for p in priors {
        if p.len() != y.len() {
            return Err(NeimError::DimensionMismatch {
                expected: y.len(),
                got: p.len(),
            });
        }
        let np = norm2(p);
        if np == T::zero() {
            continue;
        }
        let mut w = p.clone();
        project_out(&mut w, &q);
        let nw = norm2(&w);
        if nw <= tol * np {
            continue;
        }
        w.iter_mut().for_each(|x| *x /= nw);
        q.push(w);
    }
    let mut z = y.to_vec();
    project_out(&mut z, &q);
    let nz = norm2(&z);
    if nz < tol * ny {
        return Err(NeimError::Degenerate);
    }
    z.iter_mut().for_each(|x| *x /= nz);
    Ok(z)
}

fn project_out<T: Real>(v: &mut [T], q: &[Vec<T>]) {
    for _ in 0..2 {
        for b in q {
            let h = dot(b, v);
            axpy(-h, b, v);
        }
    }
}

/// Weighted least-squares coefficients at training parameter `j`:
/// solves `𝖠θ = 𝖻` with `𝖠_kl = Σᵢ w ⟨M_k(ṽᵢ), M_l(ṽᵢ)⟩` and
/// `𝖻_k = Σᵢ w ⟨M_k(ṽᵢ), g[i][j]⟩`, falling back to a truncated-SVD
/// least-squares solve when `𝖠` is singular.
pub fn solve_theta<T: Real>(grid: &TrainingGrid<T>, mode_values: &[Vec<Vec<T>>], weights: &ErrorWeights<T>, j: usize) -> Vec<T> {
    let k = mode_values.len();
    if k == 0 {
        return Vec::new();
    }
    let params = grid.params();
    let mut a = DenseMatrix::zeros(k, k);
    let mut b = vec![T::zero(); k];
    for i in 0..grid.m() {
        let w = weights.weight(params, i, j);
        if w == T::zero() {
            continue;
        }
        let target = grid.g(i, j);
        for p in 0..k {
            let mp = &mode_values[p][i];
            b[p] += w * dot(mp, target);
            for q in p..k {
                let v = w * dot(mp, &mode_values[q][i]);
                a[(p, q)] += v;
            }
        }
    }
    for p in 0..k {
        for q in 0..p {
            a[(p, q)] = a[(q, p)];
        }
    }
    match solve_linear(&a, &b) {
        Ok(theta) if theta.iter().all(|x| x.is_finite()) => theta,
        _ => lstsq_svd(&a, &b, T::lit(LSTSQ_CUTOFF)).unwrap_or_else(|_| vec![T::zero(); k]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_grid() -> TrainingGrid<f64> {
        let params = vec![vec![1.0], vec![2.0]];
        let states = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let table = vec![
            vec![vec![3.0, 4.0], vec![1.0, 0.0]],
            vec![vec![0.0, 2.0], vec![5.0, 5.0]],
        ];
        TrainingGrid::from_parts(params, states, table).unwrap()
    }

    #[test]
    fn zero_modes_error_is_target_energy() {
        let g = toy_grid();
        let s = ExpansionState::empty(2);
        assert_eq!(error_quadrature(&g, &s, &ErrorWeights::Kronecker, 0), 25.0);
        assert_eq!(error_quadrature(&g, &s, &ErrorWeights::Kronecker, 1), 50.0);
        assert_eq!(error_quadrature(&g, &s, &ErrorWeights::Uniform { c: 1.0 }, 0), 29.0);
    }

    #[test]
    fn selection_and_exhaustion() {
        let g = toy_grid();
        let s = ExpansionState::empty(2);
        assert_eq!(select_parameter(&g, &s, &ErrorWeights::Kronecker, &[false, false]).unwrap(), (1, 50.0));
        assert_eq!(select_parameter(&g, &s, &ErrorWeights::Kronecker, &[false, true]).unwrap().0, 0);
        assert!(matches!(
            select_parameter(&g, &s, &ErrorWeights::Kronecker, &[true, true]),
            Err(NeimError::ParametersExhausted)
        ));
        let zero = TrainingGrid::from_parts(
            vec![vec![0.0], vec![1.0]],
            vec![vec![0.0], vec![0.0]],
            vec![vec![vec![0.0], vec![0.0]], vec![vec![0.0], vec![0.0]]],
        )
        .unwrap();
        assert_eq!(select_parameter(&zero, &ExpansionState::empty(2), &ErrorWeights::Kronecker, &[false, false]).unwrap().0, 0);
    }

    #[test]
    fn scalar_projection_theta() {
        let g = toy_grid();
        let modes = vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]];
        assert_eq!(solve_theta(&g, &modes, &ErrorWeights::Kronecker, 0), vec![3.0]);
    }

    #[test]
    fn orthogonalization_examples() {
        let s = 1.0 / 2f64.sqrt();
        let z = orthogonalize_targets(&[s, s], &[vec![1.0, 0.0]]).unwrap();
        assert!(z[0].abs() < 1e-16 && (z[1] - 1.0).abs() < 1e-15);
        let z = orthogonalize_targets(&[3.0, 4.0], &[]).unwrap();
        assert_eq!(z, vec![0.6, 0.8]);
        assert!(matches!(orthogonalize_targets(&[0.0, 0.0], &[]), Err(NeimError::Degenerate)));
        assert!(matches!(
            orthogonalize_targets(&[1.0, 1.0], &[vec![1.0, 0.0], vec![0.0, 2.0]]),
            Err(NeimError::Degenerate)
        ));
    }

    #[test]
    fn non_orthogonal_priors() {
        let priors: Vec<Vec<f64>> = vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]];
        let z = orthogonalize_targets(&[0.3, 0.2, 0.7], &priors).unwrap();
        assert!((z[2] - 1.0).abs() < 1e-15);
        for p in &priors {
            assert!(dot(&z, p).abs() < 1e-15);
        }
    }
}
