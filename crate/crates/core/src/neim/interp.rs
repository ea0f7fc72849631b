use serde::{Deserialize, Serialize};

use super::NeimError;
use crate::numkit::{solve_linear, DenseMatrix};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationMethod {
    PiecewiseLinear,
    /// Not-a-knot cubic spline.
    #[default]
    CubicSpline,
}

/// Interpolant of one coefficient over sorted scalar nodes.
///
/// Exact at the nodes and constant beyond the outermost nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interpolant1D<T> {
    method: InterpolationMethod,
    nodes: Vec<T>,
    values: Vec<T>,
    /// Per-interval `[a, b, c, d]` of `a + b t + c t² + d t³`, `t = x − nodes[k]`.
    coeffs: Vec<[T; 4]>,
}

impl<T: Real> Interpolant1D<T> {
    pub fn new(method: InterpolationMethod, nodes: Vec<T>, values: Vec<T>) -> Result<Self, NeimError> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(NeimError::Interpolation(format!(
                "{} nodes for {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(NeimError::Interpolation("non-finite node or value".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(NeimError::Interpolation(
                "nodes must be strictly increasing (duplicate parameters?)".into(),
            ));
        }
        let coeffs = match method {
            InterpolationMethod::PiecewiseLinear => linear_coeffs(&nodes, &values),
            InterpolationMethod::CubicSpline => spline_coeffs(&nodes, &values)?,
        };
        Ok(Self {
            method,
            nodes,
            values,
            coeffs,
        })
    }

    pub fn method(&self) -> InterpolationMethod {
        self.method
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn eval(&self, x: T) -> T {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return self.values[0];
        }
        if x >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        // nodes[k] <= x < nodes[k + 1]
        let k = match self.nodes.binary_search_by(|p| p.partial_cmp(&x).expect("finite nodes")) {
            Ok(k) => return self.values[k],
            Err(pos) => pos - 1,
        };
        let [a, b, c, d] = self.coeffs[k];
        let t = x - self.nodes[k];
        a + t * (b + t * (c + t * d))
    }
}

fn linear_coeffs<T: Real>(x: &[T], y: &[T]) -> Vec<[T; 4]> {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| [ys[0], (ys[1] - ys[0]) / (xs[1] - xs[0]), T::zero(), T::zero()])
        .collect()
}

/// Second derivatives of the not-a-knot spline, then per-interval coefficients.
fn spline_coeffs<T: Real>(x: &[T], y: &[T]) -> Result<Vec<[T; 4]>, NeimError> {
    let n = x.len();
    if n <= 2 {
        return Ok(linear_coeffs(x, y));
    }
    let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let slope: Vec<T> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let six = T::lit(6.0);
    let two = T::lit(2.0);
    let m2: Vec<T> = if n == 3 {
        // the two not-a-knot conditions coincide: the parabola through the points
        let c = two * (slope[1] - slope[0]) / (x[2] - x[0]);
        vec![c; 3]
    } else {
        let mut a = DenseMatrix::zeros(n, n);
        let mut rhs = vec![T::zero(); n];
        a[(0, 0)] = h[1];
        a[(0, 1)] = -(h[0] + h[1]);
        a[(0, 2)] = h[0];
        for i in 1..n - 1 {
            a[(i, i - 1)] = h[i - 1];
            a[(i, i)] = two * (h[i - 1] + h[i]);
            a[(i, i + 1)] = h[i];
            rhs[i] = six * (slope[i] - slope[i - 1]);
        }
        a[(n - 1, n - 3)] = h[n - 2];
        a[(n - 1, n - 2)] = -(h[n - 3] + h[n - 2]);
        a[(n - 1, n - 1)] = h[n - 3];
        solve_linear(&a, &rhs).map_err(|e| NeimError::Interpolation(format!("spline system: {e}")))?
    };
    Ok((0..n - 1)
        .map(|k| {
            let b = slope[k] - h[k] * (two * m2[k] + m2[k + 1]) / six;
            [y[k], b, m2[k] / two, (m2[k + 1] - m2[k]) / (six * h[k])]
        })
        .collect())
}

/// Coefficient interpolants over the training parameters.
///
/// Scalar parameters use one [`Interpolant1D`] per coefficient; vector
/// parameters fall back to the coefficients of the nearest training parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ThetaInterpolants<T> {
    Scalar { per_coefficient: Vec<Interpolant1D<T>> },
    NearestNeighbor { params: Vec<Vec<T>>, table: Vec<Vec<T>> },
}

/// Builds interpolants from the coefficient table `table[j]` at parameter `params[j]`.
pub fn finalize_theta<T: Real>(
    table: &[Vec<T>],
    params: &[Vec<T>],
    method: InterpolationMethod,
) -> Result<ThetaInterpolants<T>, NeimError> {
    if table.len() != params.len() || params.is_empty() {
        return Err(NeimError::Interpolation(format!(
            "{} coefficient rows for {} parameters",
            table.len(),
            params.len()
        )));
    }
    let k = table[0].len();
    if table.iter().any(|row| row.len() != k) {
        return Err(NeimError::Interpolation("ragged coefficient table".into()));
    }
    for (i, a) in params.iter().enumerate() {
        if params[..i].contains(a) {
            return Err(NeimError::Interpolation(format!("parameter {i} is duplicated")));
        }
    }
    if params[0].len() != 1 {
        return Ok(ThetaInterpolants::NearestNeighbor {
            params: params.to_vec(),
            table: table.to_vec(),
        });
    }
    let mut order: Vec<usize> = (0..params.len()).collect();
    order.sort_by(|&a, &b| params[a][0].partial_cmp(&params[b][0]).expect("finite parameters"));
    let nodes: Vec<T> = order.iter().map(|&j| params[j][0]).collect();
    let per_coefficient = (0..k)
        .map(|l| {
            let values = order.iter().map(|&j| table[j][l]).collect();
            Interpolant1D::new(method, nodes.clone(), values)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ThetaInterpolants::Scalar { per_coefficient })
}

impl<T: Real> ThetaInterpolants<T> {
    pub fn len(&self) -> usize {
        match self {
            ThetaInterpolants::Scalar { per_coefficient } => per_coefficient.len(),
            ThetaInterpolants::NearestNeighbor { table, .. } => table[0].len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn eval(&self, mu: &[T]) -> Vec<T> {
        match self {
            ThetaInterpolants::Scalar { per_coefficient } => per_coefficient.iter().map(|f| f.eval(mu[0])).collect(),
            ThetaInterpolants::NearestNeighbor { params, table } => {
                let mut best = 0;
                let mut best_d = T::infinity();
                for (j, p) in params.iter().enumerate() {
                    let d: T = p.iter().zip(mu).map(|(&a, &b)| (a - b) * (a - b)).sum();
                    if d < best_d {
                        best_d = d;
                        best = j;
                    }
                }
                table[best].clone()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(n: usize) -> Vec<f64> {
        (0..n).map(|i| 1.0 + 0.3 * i as f64 + 0.01 * (i * i) as f64).collect()
    }

    #[test]
    fn exact_at_nodes_and_clamped() {
        for method in [InterpolationMethod::PiecewiseLinear, InterpolationMethod::CubicSpline] {
            for n in 1..7 {
                let x = nodes(n);
                let y: Vec<f64> = x.iter().map(|t| (3.0 * t).sin()).collect();
                let f = Interpolant1D::new(method, x.clone(), y.clone()).unwrap();
                for (a, b) in x.iter().zip(&y) {
                    assert_eq!(f.eval(*a), *b);
                }
                assert_eq!(f.eval(x[0] - 5.0), y[0]);
                assert_eq!(f.eval(x[n - 1] + 5.0), y[n - 1]);
            }
        }
    }

    #[test]
    fn linear_midpoints_and_constants() {
        let x = nodes(5);
        let y: Vec<f64> = x.iter().map(|t| 2.0 * t - 1.0).collect();
        let f = Interpolant1D::new(InterpolationMethod::PiecewiseLinear, x.clone(), y).unwrap();
        for w in x.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            assert!((f.eval(mid) - (2.0 * mid - 1.0)).abs() < 1e-14);
        }
        let c = Interpolant1D::new(InterpolationMethod::CubicSpline, x.clone(), vec![4.5; 5]).unwrap();
        assert!((c.eval(1.77) - 4.5).abs() < 1e-14);
    }

    #[test]
    fn spline_reproduces_cubics() {
        let x = nodes(6);
        let p = |t: f64| 0.5 * t * t * t - t * t + 2.0;
        let f = Interpolant1D::new(InterpolationMethod::CubicSpline, x.clone(), x.iter().map(|&t| p(t)).collect()).unwrap();
        for t in [1.05, 1.4, 2.0, 2.33] {
            assert!((f.eval(t) - p(t)).abs() < 1e-12, "{t}");
        }
        let x3 = nodes(3);
        let q = |t: f64| 3.0 * t * t - t;
        let f3 = Interpolant1D::new(InterpolationMethod::CubicSpline, x3.clone(), x3.iter().map(|&t| q(t)).collect()).unwrap();
        assert!((f3.eval(1.2) - q(1.2)).abs() < 1e-12);
    }

    #[test]
    fn duplicates_rejected() {
        assert!(Interpolant1D::new(InterpolationMethod::CubicSpline, vec![1.0, 1.0], vec![0.0, 1.0]).is_err());
        let params = vec![vec![1.0], vec![1.0]];
        assert!(finalize_theta(&[vec![1.0], vec![2.0]], &params, InterpolationMethod::PiecewiseLinear).is_err());
    }

    #[test]
    fn unsorted_params_and_nearest_neighbor() {
        let params = vec![vec![2.0], vec![1.0], vec![3.0]];
        let table = vec![vec![20.0], vec![10.0], vec![30.0]];
        let t = finalize_theta(&table, &params, InterpolationMethod::PiecewiseLinear).unwrap();
        assert_eq!(t.eval(&[1.5]), vec![15.0]);
        let p2 = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let t2 = finalize_theta(&[vec![1.0], vec![2.0]], &p2, InterpolationMethod::CubicSpline).unwrap();
        assert_eq!(t2.eval(&[0.9, 0.8]), vec![2.0]);
        assert_eq!(t2.eval(&[0.5, 0.5]), vec![1.0]);
    }
}
