use super::{svd, DenseMatrix, NumError};
use crate::scalar::{dot, Real};

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
///
/// A pivot smaller than `PIVOT_TOL * ‖a‖∞` is reported as singular.
pub fn solve_linear<T: Real>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>, NumError> {
    let n = a.rows();
    if a.cols() != n {
        return Err(NumError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if b.len() != n {
        return Err(NumError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let threshold = T::lit(T::PIVOT_TOL) * a.norm_inf();
    let mut lu = a.clone();
    let mut x = b.to_vec();

    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].abs();
        for i in k + 1..n {
            let v = lu[(i, k)].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best <= threshold || best == T::zero() {
            return Err(NumError::Singular { step: k });
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            x.swap(k, p);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let factor = lu[(i, k)] / pivot;
            if factor == T::zero() {
                continue;
            }
            lu[(i, k)] = T::zero();
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= factor * u;
            }
            let xk = x[k];
            x[i] -= factor * xk;
        }
    }
    for k in (0..n).rev() {
        let s = dot(&lu.row(k)[k + 1..], &x[k + 1..]);
        x[k] = (x[k] - s) / lu[(k, k)];
    }
    Ok(x)
}

/// Minimum-norm least-squares solution of `a x ≈ b`, discarding singular
/// values at or below `cutoff * sigma_max`.
pub fn lstsq_svd<T: Real>(a: &DenseMatrix<T>, b: &[T], cutoff: T) -> Result<Vec<T>, NumError> {
    if a.rows() == 0 {
        return Err(NumError::Empty);
    }
    if b.len() != a.rows() {
        return Err(NumError::DimensionMismatch {
            expected: a.rows(),
            got: b.len(),
        });
    }
    if a.cols() == 0 {
        return Ok(Vec::new());
    }
    let s = svd(a)?;
    let smax = s.sigma[0];
    let mut x = vec![T::zero(); a.cols()];
    if smax == T::zero() {
        return Ok(x);
    }
    let utb = s.u.tr_matvec(b);
    for (k, (&sk, &c)) in s.sigma.iter().zip(&utb).enumerate() {
        if sk <= cutoff * smax {
            break;
        }
        let coef = c / sk;
        for (xj, &vkj) in x.iter_mut().zip(s.vt.row(k)) {
            *xj += coef * vkj;
        }
    }
    Ok(x)
}

/// Thomas algorithm for a tridiagonal system. `lower[i]` couples row `i + 1`
/// to column `i`, `upper[i]` couples row `i` to column `i + 1`.
pub fn solve_tridiagonal<T: Real>(
    diag: &[T],
    lower: &[T],
    upper: &[T],
    b: &[T],
) -> Result<Vec<T>, NumError> {
    let n = diag.len();
    if b.len() != n {
        return Err(NumError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let off = n.saturating_sub(1);
    for len in [lower.len(), upper.len()] {
        if len != off {
            return Err(NumError::DimensionMismatch {
                expected: off,
                got: len,
            });
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    let mut denom = diag[0];
    if denom == T::zero() {
        return Err(NumError::Singular { step: 0 });
    }
    if n > 1 {
        c[0] = upper[0] / denom;
    }
    d[0] = b[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i - 1] * c[i - 1];
        if denom == T::zero() {
            return Err(NumError::Singular { step: i });
        }
        if i < n - 1 {
            c[i] = upper[i] / denom;
        }
        d[i] = (b[i] - lower[i - 1] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::norm2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn well_conditioned(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix<f64> {
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = rng.gen_range(-1.0..1.0);
            }
            a[(i, i)] += n as f64;
        }
        a
    }

    fn residual(a: &DenseMatrix<f64>, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.matvec(x);
        let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
        norm2(&r)
    }

    #[test]
    fn identity_and_symmetric_examples() {
        let id = DenseMatrix::identity(2);
        assert_eq!(solve_linear(&id, &[3.0, -2.0]).unwrap(), vec![3.0, -2.0]);
        let a = DenseMatrix::<f64>::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        let x = solve_linear(&a, &[1.0, 1.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_residual_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = well_conditioned(6, &mut rng);
        let b: Vec<f64> = (0..6).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let x = solve_linear(&a, &b).unwrap();
        assert!(residual(&a, &x, &b) <= 1e-10 * (1.0 + norm2(&b)));
    }

    #[test]
    fn singular_detected() {
        let a = DenseMatrix::<f64>::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            solve_linear(&a, &[1.0, 1.0]),
            Err(NumError::Singular { step: 1 })
        ));
        let rect = DenseMatrix::<f64>::zeros(2, 3);
        assert!(matches!(
            solve_linear(&rect, &[0.0, 0.0]),
            Err(NumError::NotSquare { .. })
        ));
    }

    #[test]
    fn lstsq_examples() {
        let a = DenseMatrix::<f64>::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(lstsq_svd(&a, &[2.0, 5.0], 1e-12).unwrap(), vec![2.0, 0.0]);
        let col = DenseMatrix::<f64>::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let x = lstsq_svd(&col, &[1.0, 3.0], 1e-12).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn lstsq_matches_solve_on_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let a = well_conditioned(5, &mut rng);
        let b: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x1 = solve_linear(&a, &b).unwrap();
        let x2 = lstsq_svd(&a, &b, 1e-12).unwrap();
        let d: Vec<f64> = x1.iter().zip(&x2).map(|(p, q)| p - q).collect();
        assert!(norm2(&d) <= 1e-9);
    }

    #[test]
    fn tridiagonal_examples() {
        let x: Vec<f64> = solve_tridiagonal(&[2.0, 2.0], &[-1.0], &[-1.0], &[1.0, 1.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        let b = [0.3, -7.0, 2.5];
        let x: Vec<f64> = solve_tridiagonal(&[1.0; 3], &[0.0; 2], &[0.0; 2], &b).unwrap();
        assert_eq!(x, b.to_vec());
        assert!(matches!(
            solve_tridiagonal(&[0.0, 1.0], &[1.0], &[1.0], &[1.0, 1.0]),
            Err(NumError::Singular { step: 0 })
        ));
        assert!(matches!(
            solve_tridiagonal(&[1.0, 1.0], &[1.0, 1.0], &[1.0], &[1.0, 1.0]),
            Err(NumError::DimensionMismatch { .. })
        ));
    }
}
