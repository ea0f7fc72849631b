//! Scalar abstraction shared by every numerical kernel in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar the kernels are generic over (`f32` or `f64`).
///
/// The two tolerance constants scale the fixed thresholds used throughout the
/// crate to the precision of the type: for `f64` they are the documented
/// `1e-14` pivot and `1e-12` rank tolerances.
pub trait Real:
    Float
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Relative pivot size below which a matrix is treated as singular.
    const PIVOT_TOL: f64;
    /// Relative singular value below which a direction is treated as numerically zero.
    const RANK_TOL: f64;

    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Real for f64 {
    const PIVOT_TOL: f64 = 1e-14;
    const RANK_TOL: f64 = 1e-12;
}

impl Real for f32 {
    const PIVOT_TOL: f64 = 5e-6;
    const RANK_TOL: f64 = 1e-6;
}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Index of the entry with the largest absolute value; ties go to the smallest index.
pub fn argmax_abs<T: Real>(v: &[T]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, &x) in v.iter().enumerate() {
        let a = x.abs();
        match best {
            Some((_, b)) if a <= b => {}
            _ => best = Some((i, a)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_abs_prefers_first_on_tie() {
        assert_eq!(argmax_abs(&[1.0, -3.0, 3.0]), Some(1));
        assert_eq!(argmax_abs::<f64>(&[]), None);
        assert_eq!(argmax_abs(&[0.0f32, 0.0]), Some(0));
    }

    #[test]
    fn tolerances_scale_with_precision() {
        const { assert!(f32::PIVOT_TOL > f64::PIVOT_TOL) };
        assert_eq!(<f64 as Real>::lit(0.5), 0.5);
    }
}
