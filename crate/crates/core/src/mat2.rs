use crate::poly::Poly;
use crate::scalar::{Ring, Scalar};
use serde::Serialize;
use std::ops::{Add, Mul, Neg, Sub};

/// 2×2 matrix over a commutative ring, row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Mat2<R> {
    pub m: [[R; 2]; 2],
}

impl<R: Ring> Mat2<R> {
    pub fn new(a11: R, a12: R, a21: R, a22: R) -> Self {
        Mat2 {
            m: [[a11, a12], [a21, a22]],
        }
    }

    pub fn identity() -> Self {
        Self::diag(R::one())
    }

    pub fn zero() -> Self {
        Self::diag(R::zero())
    }

    /// `c·Id`
    pub fn diag(c: R) -> Self {
        Self::new(c.clone(), R::zero(), R::zero(), c)
    }

    pub fn get(&self, r: usize, c: usize) -> &R {
        &self.m[r][c]
    }

    pub fn det(&self) -> R {
        let [[a, b], [c, d]] = &self.m;
        a.clone() * d.clone() - b.clone() * c.clone()
    }

    pub fn trace(&self) -> R {
        self.m[0][0].clone() + self.m[1][1].clone()
    }

    /// `(tr M)^2 - 4 det M`
    pub fn discr(&self) -> R {
        let t = self.trace();
        let two = R::one() + R::one();
        t.clone() * t - two.clone() * two * self.det()
    }

    pub fn transpose(&self) -> Self {
        let [[a, b], [c, d]] = self.m.clone();
        Self::new(a, c, b, d)
    }

    pub fn scale(&self, s: &R) -> Self {
        self.map(|e| e.clone() * s.clone())
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> Mat2<S> {
        Mat2::new(
            f(&self.m[0][0]),
            f(&self.m[0][1]),
            f(&self.m[1][0]),
            f(&self.m[1][1]),
        )
    }

    /// `[[0, 1], [-c, d]]`, the shape shared by every transfer matrix.
    pub fn companion(c: R, d: R) -> Self {
        Self::new(R::zero(), R::one(), -c, d)
    }
}

/// Ordered product of matrices supplied in increasing index order.
///
/// Returns `C_{n1} ⋯ C_{n0}`: each new factor multiplies from the left.
/// Every product of transfer matrices in the crate goes through here.
pub fn ordered_product<R: Ring>(factors: impl IntoIterator<Item = Mat2<R>>) -> Mat2<R> {
    factors
        .into_iter()
        .fold(Mat2::identity(), |acc, f| f * acc)
}

impl<T: Scalar> Mat2<T> {
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.is_zero() {
            return None;
        }
        let [[a, b], [c, d]] = self.m.clone();
        Some(Self::new(d / det.clone(), -b / det.clone(), -c / det.clone(), a / det))
    }

    /// Entrywise max-abs.
    pub fn max_abs(&self) -> T {
        crate::scalar::max_abs(self.m.iter().flatten().cloned())
    }

    pub fn to_f64(&self) -> Mat2<f64> {
        self.map(|e| e.to_f64_lossy())
    }
}

impl Mat2<f64> {
    /// Spectral norm.
    pub fn norm2(&self) -> f64 {
        let [[a, b], [c, d]] = self.m;
        let f = a * a + b * b + c * c + d * d;
        let det = (a * d - b * c).abs();
        let s = (f * f - 4.0 * det * det).max(0.0).sqrt();
        ((f + s) / 2.0).sqrt()
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn to_array(&self) -> [[f64; 2]; 2] {
        self.m
    }
}

impl<T: Scalar> Mat2<Poly<T>> {
    pub fn eval(&self, x: &T) -> Mat2<T> {
        self.map(|p| p.eval(x))
    }

    /// Matrix of the `k`-th coefficients.
    pub fn coeff_matrix(&self, k: usize) -> Mat2<T> {
        self.map(|p| p.coeff(k))
    }
}

impl<R: Ring> Mul for Mat2<R> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        let e = |i: usize, j: usize| a[i][0].clone() * b[0][j].clone() + a[i][1].clone() * b[1][j].clone();
        Mat2::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }
}

impl<R: Ring> Add for Mat2<R> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let [[a, b], [c, d]] = self.m;
        let [[e, f], [g, h]] = rhs.m;
        Mat2::new(a + e, b + f, c + g, d + h)
    }
}

impl<R: Ring> Sub for Mat2<R> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<R: Ring> Neg for Mat2<R> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|e| -e.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat() -> impl Strategy<Value = Mat2<f64>> {
        prop::array::uniform4(-3.0f64..3.0).prop_map(|[a, b, c, d]| Mat2::new(a, b, c, d))
    }

    #[test]
    fn product_order_is_right_to_left() {
        let a = Mat2::new(1.0, 1.0, 0.0, 1.0);
        let b = Mat2::new(1.0, 0.0, 1.0, 1.0);
        assert_eq!(ordered_product([a.clone(), b.clone()]), b * a);
    }

    #[test]
    fn norm2_of_rotation_and_diagonal() {
        assert!((Mat2::new(0.0, 1.0, -1.0, 0.0).norm2() - 1.0).abs() < 1e-15);
        assert!((Mat2::new(3.0, 0.0, 0.0, -0.5).norm2() - 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn discr_shift_invariant(m in mat(), c in -5.0f64..5.0) {
            let shifted = Mat2::diag(c) + m.clone();
            prop_assert!((shifted.discr() - m.discr()).abs() < 1e-10);
        }

        #[test]
        fn discr_conjugation_invariant(m in mat(), b in mat()) {
            prop_assume!(b.det().abs() > 0.1);
            let conj = b.inverse().unwrap() * m.clone() * b;
            let scale = 1.0 + conj.max_abs().powi(2);
            prop_assert!((conj.discr() - m.discr()).abs() < 1e-10 * scale);
        }

        #[test]
        fn discr_matches_definition(m in mat()) {
            let t = m.trace();
            prop_assert_eq!(m.discr(), t * t - 2.0 * 2.0 * m.det());
        }
    }
}
