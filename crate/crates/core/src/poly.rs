use crate::scalar::Scalar;
use num_traits::{One, Zero};
use serde::Serialize;
use std::ops::{Add, Mul, Neg, Sub};

/// Dense univariate polynomial, coefficients in ascending degree.
///
/// Trailing zeros are trimmed, so the zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `c0 + c1 x`
    pub fn linear(c0: T, c1: T) -> Self {
        Self::new(vec![c0, c1])
    }

    pub fn x() -> Self {
        Self::linear(T::zero(), T::one())
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> T {
        self.coeffs.last().cloned().unwrap_or_else(T::zero)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    /// Evaluation as an explicit sum of monomials; slower, used as a cross-check.
    pub fn eval_monomials(&self, x: &T) -> T {
        let mut pow = T::one();
        let mut sum = T::zero();
        for c in &self.coeffs {
            sum = sum + c.clone() * pow.clone();
            pow = pow * x.clone();
        }
        sum
    }

    /// `Σ |c_k| |x|^k`, the magnitude scale of an evaluation at `x`.
    pub fn eval_abs(&self, x: &T) -> T {
        let ax = x.abs_val();
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * ax.clone() + c.abs_val())
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.clone() * T::from_int(k as i64))
            .collect();
        Self::new(coeffs)
    }

    pub fn derivative_at_zero(&self) -> T {
        self.coeff(1)
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn map<S: Scalar>(&self, f: impl Fn(&T) -> S) -> Poly<S> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }

    /// Largest coefficient difference, absolute.
    pub fn max_coeff_diff(&self, other: &Self) -> T {
        let n = self.coeffs.len().max(other.coeffs.len());
        crate::scalar::max_abs((0..n).map(|k| self.coeff(k) - other.coeff(k)))
    }

    pub fn max_abs_coeff(&self) -> T {
        crate::scalar::max_abs(self.coeffs.iter().cloned())
    }
}

impl<T: Scalar> Zero for Poly<T> {
    fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl<T: Scalar> One for Poly<T> {
    fn one() -> Self {
        Self::constant(T::one())
    }
}

impl<T: Scalar> Add for Poly<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<T: Scalar> Sub for Poly<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<T: Scalar> Neg for Poly<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Poly {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl<T: Scalar> Mul for Poly<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }
}
