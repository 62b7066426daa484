//! Floating-point abstraction for the vector math.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};

/// Element type of embedding vectors and similarity scores.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumCast + Send + Sync + Debug + Display + Default + 'static
{
    /// Lossy conversion from `f64`.
    fn from_f64_lossy(value: f64) -> Self {
        <Self as NumCast>::from(value).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumCast
        + Send
        + Sync
        + Debug
        + Display
        + Default
        + 'static
{
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (&x, &y)| x.mul_add(y, acc))
}

pub fn l2_norm<S: Scalar>(v: &[S]) -> S {
    dot(v, v).sqrt()
}

/// Scales `v` to unit length. Returns `false` (leaving `v` untouched) for
/// zero or non-finite vectors.
pub fn l2_normalize<S: Scalar>(v: &mut [S]) -> bool {
    let norm = l2_norm(v);
    if !norm.is_finite() || norm <= S::zero() {
        return false;
    }
    for x in v.iter_mut() {
        *x = *x / norm;
    }
    true
}

pub fn convert_vector<S: Scalar>(v: &[f64]) -> Vec<S> {
    v.iter().map(|&x| S::from_f64_lossy(x)).collect()
}
