use num_traits::{FromPrimitive, Num, ToPrimitive};
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

/// Coefficient field of the algebraic layer.
///
/// Implemented for `f32`, `f64` and exact rationals such as
/// `num_rational::BigRational`.
pub trait Scalar:
    Num + Neg<Output = Self> + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive
{
    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("small integers are representable")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num + Neg<Output = T> + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive
{
}

/// Commutative ring with unit; entries of [`crate::Mat2`] (scalars or polynomials).
pub trait Ring:
    Clone
    + Debug
    + num_traits::Zero
    + num_traits::One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone
        + Debug
        + num_traits::Zero
        + num_traits::One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

/// Largest absolute value, used to normalise residuals.
pub(crate) fn max_abs<T: Scalar>(vals: impl IntoIterator<Item = T>) -> T {
    vals.into_iter()
        .map(|v| v.abs_val())
        .fold(T::zero(), |m, v| if v > m { v } else { m })
}
