//! Scalar abstraction so every algorithm works at `f32` and `f64`.

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Real scalar type underlying all operators.
///
/// `RealField` supplies arithmetic, comparisons, `sqrt` and friends, and
/// makes `Complex<T>` a full complex field; `ToPrimitive` is used when
/// reports need plain `f64` numbers.
pub trait Scalar: RealField + ToPrimitive + Copy {
    /// Lossy conversion from `f64`, used for tolerances and constants.
    /// Every `f64` constant in this crate is representable at `f32`.
    fn from_f64_lossy(value: f64) -> Self;
}

impl Scalar for f32 {
    fn from_f64_lossy(value: f64) -> Self {
        value as f32
    }
}

impl Scalar for f64 {
    fn from_f64_lossy(value: f64) -> Self {
        value
    }
}
