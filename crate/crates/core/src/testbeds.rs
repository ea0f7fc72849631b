//! Finite-difference benchmark problems on `[−1, 1]` with parameter `μ ∈ [1, π]`.
//!
//! Both problems discretize `Δv = s` with homogeneous Dirichlet data on `n`
//! equally spaced points, scaling the second-difference matrix by `h⁻²`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::deim::{DeimError, DeimModel};
use crate::neim::{NeimError, NeimModel};
use crate::numkit::{lstsq_svd, solve_linear, solve_tridiagonal, DenseMatrix, NumError};
use crate::pod::{PodBasis, PodError, SnapshotSet};
use crate::scalar::norm2;

pub const PARAM_MIN: f64 = 1.0;
pub const PARAM_MAX: f64 = PI;
pub const DEFAULT_N: usize = 100;
pub const DEFAULT_H_INV_SQ: f64 = 30.0;
pub const DEFAULT_M: usize = 51;
pub const DEFAULT_TEST_COUNT: usize = 500;

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 50;
const ROM_TOL: f64 = 1e-8;
const ROM_MAX_ITER: usize = 100;
const ROM_FD_STEP: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum TestbedError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("reduced Newton did not converge; residual history {residuals:?}")]
    RomNoConvergence { residuals: Vec<f64> },
    #[error(transparent)]
    Numerics(#[from] NumError),
    #[error(transparent)]
    Pod(#[from] PodError),
    #[error(transparent)]
    Deim(#[from] DeimError),
    #[error(transparent)]
    Neim(#[from] NeimError),
}

/// `n` equally spaced points on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    x: Vec<f64>,
    h_inv_sq: f64,
}

impl Grid1D {
    pub fn new(n: usize, h_inv_sq: f64) -> Result<Self, TestbedError> {
        if n < 3 {
            return Err(TestbedError::InvalidGrid(format!("need at least 3 points, got {n}")));
        }
        if !(h_inv_sq > 0.0 && h_inv_sq.is_finite()) {
            return Err(TestbedError::InvalidGrid(format!("invalid h^-2 = {h_inv_sq}")));
        }
        Ok(Self {
            x: equispaced(-1.0, 1.0, n),
            h_inv_sq,
        })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn h_inv_sq(&self) -> f64 {
        self.h_inv_sq
    }

    /// `h⁻²Ã` with `Ã` the second-difference matrix on the interior and
    /// identity rows at the two boundary points, as tridiagonal bands
    /// `(diag, lower, upper)`.
    pub fn padded_operator(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.n();
        let c = self.h_inv_sq;
        let mut diag = vec![2.0 * c; n];
        let mut lower = vec![-c; n - 1];
        let mut upper = vec![-c; n - 1];
        diag[0] = c;
        diag[n - 1] = c;
        upper[0] = 0.0;
        lower[0] = 0.0;
        upper[n - 2] = 0.0;
        lower[n - 2] = 0.0;
        (diag, lower, upper)
    }

    /// `h⁻²Ã v`
    pub fn apply_operator(&self, v: &[f64]) -> Vec<f64> {
        let (diag, lower, upper) = self.padded_operator();
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut s = diag[i] * v[i];
                if i > 0 {
                    s += lower[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += upper[i] * v[i + 1];
                }
                s
            })
            .collect()
    }
}

impl Default for Grid1D {
    fn default() -> Self {
        Self::new(DEFAULT_N, DEFAULT_H_INV_SQ).expect("valid default grid")
    }
}

/// `count` equally spaced points from `a` to `b` inclusive.
pub fn equispaced(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (count - 1) as f64;
            (0..count).map(|i| if i == count - 1 { b } else { a + h * i as f64 }).collect()
        }
    }
}

/// `count` equally spaced parameters in `[1, π]`.
pub fn parameter_grid(count: usize) -> Vec<f64> {
    equispaced(PARAM_MIN, PARAM_MAX, count)
}

/// `(1 − x) cos(3πμ(x + 1)) e^{−(1 + x)μ}`
pub fn exp1_forcing(x: f64, mu: f64) -> f64 {
    (1.0 - x) * (3.0 * PI * mu * (x + 1.0)).cos() * (-(1.0 + x) * mu).exp()
}

/// `(1 − |x|) e^{−(1 + x)vμ}`
pub fn exp2_nonlinearity(x: f64, v: f64, mu: f64) -> f64 {
    (1.0 - x.abs()) * (-(1.0 + x) * v * mu).exp()
}

/// `∂/∂v` of [`exp2_nonlinearity`].
pub fn exp2_nonlinearity_dv(x: f64, v: f64, mu: f64) -> f64 {
    -(1.0 + x) * mu * exp2_nonlinearity(x, v, mu)
}

/// A parameterized problem with a componentwise nonlinearity.
pub trait Testbed {
    fn grid(&self) -> &Grid1D;

    /// Number of training parameters.
    fn m(&self) -> usize;

    /// High-fidelity solution at `μ`.
    fn solve(&self, mu: f64) -> Result<Vec<f64>, TestbedError>;

    /// Entry `i` of the nonlinearity given the state value there.
    fn nonlinearity_row(&self, i: usize, v_i: f64, mu: f64) -> f64;

    fn nonlinearity(&self, v: &[f64], mu: f64) -> Vec<f64> {
        v.iter().enumerate().map(|(i, &vi)| self.nonlinearity_row(i, vi, mu)).collect()
    }

    fn training_params(&self) -> Vec<f64> {
        parameter_grid(self.m())
    }

    fn snapshots(&self) -> Result<SnapshotSet<f64>, TestbedError> {
        let params = self.training_params();
        let sols = params.iter().map(|&mu| self.solve(mu)).collect::<Result<Vec<_>, _>>()?;
        Ok(SnapshotSet::from_scalar_params(&params, sols)?)
    }

    /// `U_rᵀ N(U_r ṽ; μ)` evaluated densely.
    fn reduced_nonlinearity(&self, basis: &PodBasis<f64>, reduced: &[f64], mu: f64) -> Result<Vec<f64>, TestbedError> {
        let v = basis.lift(reduced)?;
        Ok(basis.project(&self.nonlinearity(&v, mu))?)
    }
}

/// Poisson problem with the state-independent forcing [`exp1_forcing`].
#[derive(Debug, Clone, Default)]
pub struct Exp1Problem {
    pub grid: Grid1D,
    pub m: usize,
}

impl Exp1Problem {
    pub fn new(grid: Grid1D, m: usize) -> Self {
        Self { grid, m }
    }

    pub fn standard() -> Self {
        Self::new(Grid1D::default(), DEFAULT_M)
    }

    pub fn forcing(&self, mu: f64) -> Vec<f64> {
        self.grid.x().iter().map(|&x| exp1_forcing(x, mu)).collect()
    }

    /// Solves `h⁻²A v_{2:n−1} = f_{2:n−1}` with `v₁ = v_n = 0`.
    pub fn solve_with_forcing(&self, f: &[f64]) -> Result<Vec<f64>, TestbedError> {
        let n = self.grid.n();
        let c = self.grid.h_inv_sq();
        let k = n - 2;
        let inner = solve_tridiagonal(&vec![2.0 * c; k], &vec![-c; k - 1], &vec![-c; k - 1], &f[1..n - 1])?;
        let mut v = vec![0.0; n];
        v[1..n - 1].copy_from_slice(&inner);
        Ok(v)
    }
}

impl Testbed for Exp1Problem {
    fn grid(&self) -> &Grid1D {
        &self.grid
    }

    fn m(&self) -> usize {
        self.m
    }

    fn solve(&self, mu: f64) -> Result<Vec<f64>, TestbedError> {
        self.solve_with_forcing(&self.forcing(mu))
    }

    fn nonlinearity_row(&self, i: usize, _v_i: f64, mu: f64) -> f64 {
        exp1_forcing(self.grid.x()[i], mu)
    }
}

/// Semilinear problem `h⁻²Ã v = f(v; μ)` with [`exp2_nonlinearity`].
#[derive(Debug, Clone, Default)]
pub struct Exp2Problem {
    pub grid: Grid1D,
    pub m: usize,
}

/// Newton iterate and the `‖F‖∞` history, starting with the initial residual.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub v: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl Exp2Problem {
    pub fn new(grid: Grid1D, m: usize) -> Self {
        Self { grid, m }
    }

    pub fn standard() -> Self {
        Self::new(Grid1D::default(), DEFAULT_M)
    }

    /// `F(v) = h⁻²Ã v − f(v; μ)`
    pub fn residual(&self, v: &[f64], mu: f64) -> Vec<f64> {
        let av = self.grid.apply_operator(v);
        av.iter()
            .zip(self.grid.x())
            .zip(v)
            .map(|((&a, &x), &vi)| a - exp2_nonlinearity(x, vi, mu))
            .collect()
    }

    /// Undamped Newton from `v ≡ 0` until `‖F‖∞ ≤ 1e-10`.
    pub fn newton(&self, mu: f64) -> Result<NewtonReport, TestbedError> {
        let n = self.grid.n();
        let (diag_op, lower, upper) = self.grid.padded_operator();
        let x = self.grid.x();
        let mut v = vec![0.0; n];
        let mut f = self.residual(&v, mu);
        let mut residuals = vec![norm_inf(&f)];
        for _ in 0..NEWTON_MAX_ITER {
            if residuals[residuals.len() - 1] <= NEWTON_TOL {
                return Ok(NewtonReport { v, residuals });
            }
            let diag: Vec<f64> = (0..n).map(|i| diag_op[i] - exp2_nonlinearity_dv(x[i], v[i], mu)).collect();
            let rhs: Vec<f64> = f.iter().map(|r| -r).collect();
            let delta = solve_tridiagonal(&diag, &lower, &upper, &rhs)?;
            v.iter_mut().zip(&delta).for_each(|(a, d)| *a += d);
            f = self.residual(&v, mu);
            residuals.push(norm_inf(&f));
        }
        let last = residuals[residuals.len() - 1];
        if last <= NEWTON_TOL {
            return Ok(NewtonReport { v, residuals });
        }
        Err(TestbedError::NoConvergence {
            iterations: NEWTON_MAX_ITER,
            residual: last,
        })
    }

    /// `Ã_r = U_rᵀ (h⁻²Ã) U_r`
    pub fn reduced_operator(&self, basis: &PodBasis<f64>) -> DenseMatrix<f64> {
        let r = basis.r();
        let mut a = DenseMatrix::zeros(r, r);
        for j in 0..r {
            let col = self.grid.apply_operator(&basis.column(j));
            let proj = basis.matrix().tr_matvec(&col);
            for i in 0..r {
                a[(i, j)] = proj[i];
            }
        }
        a
    }
}

impl Testbed for Exp2Problem {
    fn grid(&self) -> &Grid1D {
        &self.grid
    }

    fn m(&self) -> usize {
        self.m
    }

    fn solve(&self, mu: f64) -> Result<Vec<f64>, TestbedError> {
        Ok(self.newton(mu)?.v)
    }

    fn nonlinearity_row(&self, i: usize, v_i: f64, mu: f64) -> f64 {
        exp2_nonlinearity(self.grid.x()[i], v_i, mu)
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Reduced nonlinearity used inside [`rom_solve_exp2`].
#[derive(Debug, Clone, Copy)]
pub enum Surrogate<'a> {
    Neim(&'a NeimModel<f64>),
    Deim(&'a DeimModel<f64>),
    /// Dense `U_rᵀ N(U_r ṽ; μ)`.
    Exact,
    Zero,
}

impl Surrogate<'_> {
    pub fn eval<P: Testbed>(&self, problem: &P, basis: &PodBasis<f64>, reduced: &[f64], mu: f64) -> Result<Vec<f64>, TestbedError> {
        match self {
            Surrogate::Neim(model) => Ok(model.eval(reduced, &[mu])?),
            Surrogate::Deim(model) => model.eval::<TestbedError, _>(basis, reduced, &[mu], |i, vi, p| {
                Ok(problem.nonlinearity_row(i, vi, p[0]))
            }),
            Surrogate::Exact => problem.reduced_nonlinearity(basis, reduced, mu),
            Surrogate::Zero => Ok(vec![0.0; basis.r()]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RomSolution {
    pub reduced: Vec<f64>,
    /// `‖R‖∞` per iteration, starting with the initial guess.
    pub residuals: Vec<f64>,
}

/// Newton on `R(ṽ) = Ã_r ṽ − N̂(ṽ; μ)`, with the surrogate Jacobian by
/// forward differences, started from the projection of the training snapshot
/// whose parameter is nearest to `μ`.
pub fn rom_solve_exp2(
    problem: &Exp2Problem,
    basis: &PodBasis<f64>,
    snapshots: &SnapshotSet<f64>,
    surrogate: Surrogate<'_>,
    mu: f64,
) -> Result<RomSolution, TestbedError> {
    let r = basis.r();
    let a_r = problem.reduced_operator(basis);
    let nearest = snapshots
        .parameters()
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1[0] - mu).abs().partial_cmp(&(b.1[0] - mu).abs()).expect("finite parameters"))
        .map(|(j, _)| j)
        .expect("nonempty snapshot set");
    let mut vt = basis.project(&snapshots.snapshots()[nearest])?;
    let residual = |vt: &[f64]| -> Result<(Vec<f64>, Vec<f64>), TestbedError> {
        let nl = surrogate.eval(problem, basis, vt, mu)?;
        let av = a_r.matvec(vt);
        Ok((av.iter().zip(&nl).map(|(a, b)| a - b).collect(), nl))
    };
    let (mut res, mut nl) = residual(&vt)?;
    let mut history = vec![norm_inf(&res)];
    for _ in 0..ROM_MAX_ITER {
        if history[history.len() - 1] <= ROM_TOL {
            return Ok(RomSolution {
                reduced: vt,
                residuals: history,
            });
        }
        let mut jac = a_r.clone();
        for c in 0..r {
            let mut shifted = vt.clone();
            shifted[c] += ROM_FD_STEP;
            let nl_c = surrogate.eval(problem, basis, &shifted, mu)?;
            for i in 0..r {
                jac[(i, c)] -= (nl_c[i] - nl[i]) / ROM_FD_STEP;
            }
        }
        let rhs: Vec<f64> = res.iter().map(|x| -x).collect();
        let delta = match solve_linear(&jac, &rhs) {
            Ok(d) => d,
            Err(_) => lstsq_svd(&jac, &rhs, 1e-12)?,
        };
        vt.iter_mut().zip(&delta).for_each(|(a, d)| *a += d);
        (res, nl) = residual(&vt)?;
        history.push(norm_inf(&res));
        if !history[history.len() - 1].is_finite() {
            break;
        }
    }
    if history[history.len() - 1] <= ROM_TOL {
        return Ok(RomSolution {
            reduced: vt,
            residuals: history,
        });
    }
    Err(TestbedError::RomNoConvergence { residuals: history })
}

/// `‖approx(μ) − exact(μ)‖₂` at every test parameter.
pub fn abs_errors<E, A, X>(mut approx: A, mut exact: X, test_params: &[f64]) -> Result<Vec<f64>, E>
where
    A: FnMut(f64) -> Result<Vec<f64>, E>,
    X: FnMut(f64) -> Result<Vec<f64>, E>,
{
    test_params
        .iter()
        .map(|&mu| {
            let a = approx(mu)?;
            let e = exact(mu)?;
            let d: Vec<f64> = a.iter().zip(&e).map(|(p, q)| p - q).collect();
            Ok(norm2(&d))
        })
        .collect()
}

/// `(1/m_test) Σⱼ ‖approx(μⱼ) − exact(μⱼ)‖₂`
pub fn avg_abs_error<E, A, X>(approx: A, exact: X, test_params: &[f64]) -> Result<f64, E>
where
    A: FnMut(f64) -> Result<Vec<f64>, E>,
    X: FnMut(f64) -> Result<Vec<f64>, E>,
{
    let errs = abs_errors(approx, exact, test_params)?;
    Ok(errs.iter().sum::<f64>() / errs.len().max(1) as f64)
}
