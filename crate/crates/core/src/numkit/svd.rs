//! Thin singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! The columns of the input are rotated pairwise until every pair is
//! numerically orthogonal; the column norms are then the singular values and
//! the accumulated rotations the right singular vectors. The method is slow
//! compared to bidiagonalization but is accurate in the relative sense and
//! fully deterministic, which is what the reduced-basis code needs for
//! matrices of a few hundred columns.

use serde::{Deserialize, Serialize};

use super::{DenseMatrix, NumError};
use crate::scalar::{axpy, dot, norm2, Real};

const MAX_SWEEPS: usize = 80;

/// `m = u · diag(sigma) · vt` with `u` column-orthonormal and `sigma` nonincreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdResult<T> {
    pub u: DenseMatrix<T>,
    pub sigma: Vec<T>,
    pub vt: DenseMatrix<T>,
}

impl<T: Real> SvdResult<T> {
    /// Number of singular values above `cutoff * sigma_max`.
    pub fn rank(&self, cutoff: T) -> usize {
        let smax = self.sigma.first().copied().unwrap_or_else(T::zero);
        self.sigma.iter().filter(|&&s| s > cutoff * smax).count()
    }

    pub fn reconstruct(&self) -> DenseMatrix<T> {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (x, &s) in us.row_mut(i).iter_mut().zip(&self.sigma) {
                *x *= s;
            }
        }
        us.matmul(&self.vt)
    }
}

/// Thin SVD of `m`: with `k = min(rows, cols)`, `u` is `rows × k`, `sigma` has
/// length `k` and `vt` is `k × cols`.
pub fn svd<T: Real>(m: &DenseMatrix<T>) -> Result<SvdResult<T>, NumError> {
    if m.is_empty() {
        return Err(NumError::Empty);
    }
    if m.rows() >= m.cols() {
        jacobi_tall(m)
    } else {
        let t = jacobi_tall(&m.transpose())?;
        Ok(SvdResult {
            u: t.vt.transpose(),
            sigma: t.sigma,
            vt: t.u.transpose(),
        })
    }
}

fn jacobi_tall<T: Real>(m: &DenseMatrix<T>) -> Result<SvdResult<T>, NumError> {
    let rows = m.rows();
    let n = m.cols();
    let mut w = m.columns();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|j| {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            e
        })
        .collect();
    let tol = T::epsilon() * T::from_usize_lossy(rows);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == T::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(NumError::NoConvergence {
            iterations: MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<T> = w.iter().map(|c| norm2(c)).collect();
    // stable sort keeps the original column order among equal singular values
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).expect("finite norms"));

    let sigma: Vec<T> = order.iter().map(|&j| norms[j]).collect();
    let smax = sigma[0];
    let negligible = smax * T::epsilon() * T::from_usize_lossy(rows.max(n));

    let mut u_cols: Vec<Vec<T>> = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let col = if sigma[k] > negligible {
            let mut c = w[j].clone();
            let inv = T::one() / sigma[k];
            c.iter_mut().for_each(|x| *x *= inv);
            orthonormalize_against(c, &u_cols)
        } else {
            None
        };
        let col = match col {
            Some(c) => c,
            None => complete_basis(&u_cols, rows),
        };
        u_cols.push(col);
    }

    let mut u = DenseMatrix::zeros(rows, n);
    for (k, c) in u_cols.iter().enumerate() {
        for (i, &x) in c.iter().enumerate() {
            u[(i, k)] = x;
        }
    }
    let mut vt = DenseMatrix::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        vt.row_mut(k).copy_from_slice(&v[j]);
    }
    Ok(SvdResult { u, sigma, vt })
}

fn rotate<T: Real>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (head, tail) = cols.split_at_mut(q);
    let cp = &mut head[p];
    let cq = &mut tail[0];
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Two passes of modified Gram-Schmidt against an orthonormal set. Returns
/// `None` when the vector is (numerically) inside the span.
fn orthonormalize_against<T: Real>(mut c: Vec<T>, basis: &[Vec<T>]) -> Option<Vec<T>> {
    let before = norm2(&c);
    for _ in 0..2 {
        for b in basis {
            let h = dot(b, &c);
            axpy(-h, b, &mut c);
        }
    }
    let after = norm2(&c);
    if after <= T::lit(0.5) * before || after == T::zero() {
        return None;
    }
    let inv = T::one() / after;
    c.iter_mut().for_each(|x| *x *= inv);
    Some(c)
}

/// First canonical basis vector with a substantial component outside `basis`.
fn complete_basis<T: Real>(basis: &[Vec<T>], rows: usize) -> Vec<T> {
    for k in 0..rows {
        let mut e = vec![T::zero(); rows];
        e[k] = T::one();
        if let Some(c) = orthonormalize_against(e, basis) {
            return c;
        }
    }
    unreachable!("fewer than `rows` orthonormal vectors always leave a free direction")
}
