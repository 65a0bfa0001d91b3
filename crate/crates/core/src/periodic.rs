use crate::error::{Error, Result};
use crate::mat2::{ordered_product, Mat2};
use crate::poly::Poly;
use crate::scalar::{max_abs, Scalar};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// N-periodic sequence, indexed by any integer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
pub struct PeriodicSeq<T: Clone> {
    values: Vec<T>,
}

impl<T: Clone> TryFrom<Vec<T>> for PeriodicSeq<T> {
    type Error = Error;
    fn try_from(values: Vec<T>) -> Result<Self> {
        PeriodicSeq::new(values)
    }
}

impl<T: Clone> From<PeriodicSeq<T>> for Vec<T> {
    fn from(s: PeriodicSeq<T>) -> Vec<T> {
        s.values
    }
}

impl<T: Clone> PeriodicSeq<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("periodic sequence needs at least one value".into()));
        }
        Ok(PeriodicSeq { values })
    }

    pub fn constant(v: T, period: usize) -> Result<Self> {
        Self::new(vec![v; period])
    }

    pub fn period(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, n: i64) -> &T {
        &self.values[n.rem_euclid(self.values.len() as i64) as usize]
    }

    pub fn at(&self, n: i64) -> T {
        self.get(n).clone()
    }

    pub fn map<S: Clone>(&self, f: impl Fn(&T) -> S) -> PeriodicSeq<S> {
        PeriodicSeq {
            values: self.values.iter().map(f).collect(),
        }
    }

    /// `out[i] = self[i + k]`
    pub fn rotated(&self, k: i64) -> Self {
        let n = self.period() as i64;
        PeriodicSeq {
            values: (0..n).map(|i| self.at(i + k)).collect(),
        }
    }

    /// The same values re-declared with period `times·N`.
    pub fn repeated(&self, times: usize) -> Self {
        PeriodicSeq {
            values: self.values.iter().cycle().take(times * self.period()).cloned().collect(),
        }
    }
}

impl<T: Scalar> PeriodicSeq<T> {
    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|v| *v > T::zero())
    }
}

/// A validated pair of modulating sequences: α strictly positive, equal periods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModulation<T>")]
pub struct Modulation<T: Scalar> {
    alpha: PeriodicSeq<T>,
    beta: PeriodicSeq<T>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModulation<T: Clone> {
    alpha: PeriodicSeq<T>,
    beta: PeriodicSeq<T>,
}

impl<T: Scalar> TryFrom<RawModulation<T>> for Modulation<T> {
    type Error = Error;
    fn try_from(r: RawModulation<T>) -> Result<Self> {
        Modulation::new(r.alpha, r.beta)
    }
}

/// Table of the associated orthonormal polynomials `w_0^{[k]} .. w_n^{[k]}`.
#[derive(Clone, Debug)]
pub struct OrthoPolyTable<T: Scalar> {
    pub alpha: PeriodicSeq<T>,
    pub beta: PeriodicSeq<T>,
    pub shift: i64,
    pub polys: Vec<Poly<T>>,
}

impl<T: Scalar> OrthoPolyTable<T> {
    /// `w_n`, with `w_{-1} = 0`.
    pub fn w(&self, n: i64) -> Poly<T> {
        if n < 0 {
            Poly::zero()
        } else {
            self.polys[n as usize].clone()
        }
    }

    /// All values `w_0(x) .. w_n(x)`.
    pub fn eval_all(&self, x: &T) -> Vec<T> {
        self.polys.iter().map(|p| p.eval(x)).collect()
    }

    pub fn n_max(&self) -> usize {
        self.polys.len() - 1
    }
}

impl<T: Scalar> Modulation<T> {
    pub fn new(alpha: PeriodicSeq<T>, beta: PeriodicSeq<T>) -> Result<Self> {
        if alpha.period() != beta.period() {
            return Err(Error::Domain(format!(
                "alpha has period {} but beta has period {}",
                alpha.period(),
                beta.period()
            )));
        }
        if !alpha.is_positive() {
            return Err(Error::Domain(format!(
                "alpha must be strictly positive, got {:?}",
                alpha.values()
            )));
        }
        Ok(Modulation { alpha, beta })
    }

    pub fn from_vecs(alpha: Vec<T>, beta: Vec<T>) -> Result<Self> {
        Self::new(PeriodicSeq::new(alpha)?, PeriodicSeq::new(beta)?)
    }

    pub fn alpha(&self) -> &PeriodicSeq<T> {
        &self.alpha
    }

    pub fn beta(&self) -> &PeriodicSeq<T> {
        &self.beta
    }

    pub fn period(&self) -> usize {
        self.alpha.period()
    }

    /// `[[0, 1], [-α_{j-1}/α_j, (λ - β_j)/α_j]]`
    pub fn transfer_matrix(&self, j: i64, lambda: &T) -> Mat2<T> {
        let aj = self.alpha.at(j);
        Mat2::companion(
            self.alpha.at(j - 1) / aj.clone(),
            (lambda.clone() - self.beta.at(j)) / aj,
        )
    }

    /// Transfer matrix with symbolic spectral parameter.
    pub fn transfer_matrix_poly(&self, j: i64) -> Mat2<Poly<T>> {
        let aj = self.alpha.at(j);
        Mat2::companion(
            Poly::constant(self.alpha.at(j - 1) / aj.clone()),
            Poly::linear(-self.beta.at(j) / aj.clone(), T::one() / aj),
        )
    }

    /// `B̂^{i+n-1}(λ) ⋯ B̂^{i}(λ)`
    pub fn transfer_product(&self, i: i64, n: usize, lambda: &T) -> Mat2<T> {
        ordered_product((i..i + n as i64).map(|j| self.transfer_matrix(j, lambda)))
    }

    pub fn transfer_product_poly(&self, i: i64, n: usize) -> Mat2<Poly<T>> {
        ordered_product((i..i + n as i64).map(|j| self.transfer_matrix_poly(j)))
    }

    /// One period of transfer matrices starting at `i`.
    pub fn monodromy(&self, i: i64, lambda: &T) -> Mat2<T> {
        self.transfer_product(i, self.period(), lambda)
    }

    pub fn monodromy_poly(&self, i: i64) -> Mat2<Poly<T>> {
        self.transfer_product_poly(i, self.period())
    }

    pub fn ortho_polys(&self, shift: i64, n_max: usize) -> OrthoPolyTable<T> {
        let mut polys = Vec::with_capacity(n_max + 1);
        polys.push(Poly::one());
        let mut prev = Poly::zero();
        for n in 0..n_max as i64 {
            let k = shift + n;
            let cur = polys[n as usize].clone();
            let step = Poly::linear(-self.beta.at(k), T::one()) * cur.clone()
                - prev.scale(&self.alpha.at(k - 1));
            let next = step.scale(&(T::one() / self.alpha.at(k)));
            prev = cur;
            polys.push(next);
        }
        OrthoPolyTable {
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
            shift,
            polys,
        }
    }

    /// `w^{[shift]}_0(x), …, w^{[shift]}_{n_max}(x)` straight from the recurrence.
    pub fn ortho_values(&self, shift: i64, n_max: usize, x: &T) -> Vec<T> {
        let mut out = Vec::with_capacity(n_max + 1);
        out.push(T::one());
        let mut prev = T::zero();
        for n in 0..n_max {
            let k = shift + n as i64;
            let cur = out[n].clone();
            let next = ((x.clone() - self.beta.at(k)) * cur.clone() - self.alpha.at(k - 1) * prev) / self.alpha.at(k);
            prev = cur;
            out.push(next);
        }
        out
    }

    /// Derivative at 0 of the monodromy starting at `i`.
    pub fn dw_matrix(&self, i: i64) -> Mat2<T> {
        self.monodromy_poly(i).coeff_matrix(1)
    }

    /// The w-polynomial form of `transfer_product_poly(i, n)`:
    /// `[[-(α_{i-1}/α_i) w^{[i+1]}_{n-2}, w^{[i]}_{n-1}], [-(α_{i-1}/α_i) w^{[i+1]}_{n-1}, w^{[i]}_n]]`.
    pub fn w_matrix(&self, i: i64, n: usize) -> Mat2<Poly<T>> {
        let t0 = self.ortho_polys(i, n);
        let t1 = self.ortho_polys(i + 1, n);
        let r = -(self.alpha.at(i - 1) / self.alpha.at(i));
        let n = n as i64;
        Mat2::new(
            t1.w(n - 2).scale(&r),
            t0.w(n - 1),
            t1.w(n - 1).scale(&r),
            t0.w(n),
        )
    }

    /// Coefficient-wise gap between the transfer product and its w-polynomial form,
    /// relative to the largest coefficient involved.
    pub fn product_form_residual(&self, i: i64, n: usize) -> T {
        let a = self.transfer_product_poly(i, n);
        let b = self.w_matrix(i, n);
        let mut gap = T::zero();
        let mut scale = T::one();
        for r in 0..2 {
            for c in 0..2 {
                let d = a.m[r][c].max_coeff_diff(&b.m[r][c]);
                if d > gap {
                    gap = d;
                }
                let s = a.m[r][c].max_abs_coeff();
                if s > scale {
                    scale = s;
                }
            }
        }
        gap / scale
    }

    /// `|w_i w_i^{[1]} - w_{i+1} w_{i-1}^{[1]} - α_0/α_i|` at `x`, relative to the
    /// magnitude of the monomial terms involved.
    pub fn turan_identity_residual(&self, i: usize, x: &T) -> T {
        let t0 = self.ortho_polys(0, i + 1);
        let t1 = self.ortho_polys(1, i + 1);
        let i = i as i64;
        let ev = |p: Poly<T>| (p.eval(x), p.eval_abs(x));
        let (w, wa) = ev(t0.w(i));
        let (w1, w1a) = ev(t1.w(i));
        let (wn, wna) = ev(t0.w(i + 1));
        let (w1p, w1pa) = ev(t1.w(i - 1));
        let target = self.alpha.at(0) / self.alpha.at(i);
        let scale = max_abs([wa * w1a, wna * w1pa, target.clone(), T::one()]);
        (w * w1 - wn * w1p - target).abs_val() / scale
    }

    /// Gap between `w_n'(x)` and the Christoffel–Darboux type sum
    /// `(1/α_0) Σ_{m<n} [w_m w^{[1]}_{n-1} - w_n w^{[1]}_{m-1}] w_m`, relative.
    pub fn derivative_identity_residual(&self, n: usize, x: &T) -> T {
        assert!(n >= 1, "identity needs n >= 1");
        let t0 = self.ortho_polys(0, n);
        let t1 = self.ortho_polys(1, n);
        let ev = |p: Poly<T>| (p.eval(x), p.eval_abs(x));
        let w: Vec<_> = (0..=n as i64).map(|m| ev(t0.w(m))).collect();
        let w1: Vec<_> = (-1..n as i64).map(|m| ev(t1.w(m))).collect();
        // w1[m + 1] holds w^{[1]}_m
        let (wn, wna) = w[n].clone();
        let (w1l, w1la) = w1[n].clone();
        let mut sum = T::zero();
        let mut scale = T::zero();
        for m in 0..n {
            let (wm, wma) = w[m].clone();
            let (w1m, w1ma) = w1[m].clone();
            sum = sum + (wm.clone() * w1l.clone() - wn.clone() * w1m) * wm;
            scale = scale + (wma.clone() * w1la.clone() + wna.clone() * w1ma) * wma;
        }
        let a0 = self.alpha.at(0);
        let rhs = sum / a0.clone();
        let d = t0.w(n as i64).derivative();
        let lhs = d.eval(x);
        let scale = max_abs([scale / a0, d.eval_abs(x), T::one()]);
        (lhs - rhs).abs_val() / scale
    }

    /// `‖F(i+1) - B̂^i F(i) (B̂^i)^{-1}‖` at `λ`.
    pub fn conjugation_residual(&self, i: i64, lambda: &T) -> T {
        let b = self.transfer_matrix(i, lambda);
        let binv = b.inverse().expect("transfer matrices are invertible");
        let lhs = self.monodromy(i + 1, lambda);
        let rhs = b * self.monodromy(i, lambda) * binv;
        (lhs - rhs).max_abs()
    }

    pub fn to_f64(&self) -> Modulation<f64> {
        Modulation {
            alpha: self.alpha.map(|v| v.to_f64_lossy()),
            beta: self.beta.map(|v| v.to_f64_lossy()),
        }
    }

    pub fn rotated(&self, k: i64) -> Self {
        Modulation {
            alpha: self.alpha.rotated(k),
            beta: self.beta.rotated(k),
        }
    }

    pub fn repeated(&self, times: usize) -> Self {
        Modulation {
            alpha: self.alpha.repeated(times),
            beta: self.beta.repeated(times),
        }
    }

    /// Replaces β by β - x0.
    pub fn shifted_beta(&self, x0: &T) -> Self {
        Modulation {
            alpha: self.alpha.clone(),
            beta: self.beta.map(|b| b.clone() - x0.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn md(alpha: &[f64], beta: &[f64]) -> Modulation<f64> {
        Modulation::from_vecs(alpha.to_vec(), beta.to_vec()).unwrap()
    }

    fn close(a: &Mat2<f64>, b: &Mat2<f64>, tol: f64) -> bool {
        (a.clone() - b.clone()).max_abs() < tol
    }

    fn modulation(max_n: usize) -> impl Strategy<Value = Modulation<f64>> {
        (1..=max_n).prop_flat_map(|n| {
            (
                prop::collection::vec(0.3f64..3.0, n),
                prop::collection::vec(-2.0f64..2.0, n),
            )
                .prop_map(|(a, b)| Modulation::from_vecs(a, b).unwrap())
        })
    }

    #[test]
    fn periodic_indexing_wraps_negative() {
        let s = PeriodicSeq::new(vec![1, 2, 3]).unwrap();
        assert_eq!(*s.get(-1), 3);
        assert_eq!(*s.get(7), 2);
        assert_eq!(s.rotated(1).values(), &[2, 3, 1]);
        assert!(PeriodicSeq::<i32>::new(vec![]).is_err());
    }

    #[test]
    fn rejects_bad_pairs() {
        assert!(Modulation::from_vecs(vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(Modulation::from_vecs(vec![1.0, -2.0], vec![0.0, 0.0]).is_err());
        assert!(Modulation::from_vecs(vec![1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn transfer_matrix_examples() {
        let m = md(&[1.0], &[0.0]);
        assert_eq!(m.transfer_matrix(1, &0.0), Mat2::new(0.0, 1.0, -1.0, 0.0));

        let s5 = 5f64.sqrt();
        let m = md(&[1.0, 2.0], &[s5, s5]);
        let t = m.transfer_matrix(1, &0.0);
        assert!(close(&t, &Mat2::new(0.0, 1.0, -0.5, -s5 / 2.0), 1e-15));

        let m = md(&[1.0, 2.0], &[0.0, 0.0]);
        assert_eq!(m.transfer_matrix(2, &1.0), Mat2::new(0.0, 1.0, -2.0, 1.0));
    }

    #[test]
    fn monodromy_examples() {
        let m = md(&[1.0, 1.0], &[0.0, 0.0]);
        assert_eq!(m.monodromy(0, &0.0), Mat2::diag(-1.0));

        for q in [-1.5, 0.0, 0.7, 3.0] {
            let m = md(&[1.0, 2.0], &[q, q]);
            let tr = m.monodromy(0, &0.0).trace();
            assert!((tr - (q * q / 2.0 - 2.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn monodromy_poly_examples() {
        let m = md(&[1.0, 1.0], &[0.0, 0.0]);
        let p = m.monodromy_poly(0);
        assert_eq!(p.m[1][1].coeffs(), &[-1.0, 0.0, 1.0]);
        assert_eq!(p.m[0][1].coeffs(), &[0.0, 1.0]);

        let m = md(&[1.0, 2.0], &[0.0, 0.0]);
        let tr = m.monodromy_poly(0).trace();
        assert_eq!(tr.coeffs(), &[-2.5, 0.0, 0.5]);
    }

    #[test]
    fn exact_monodromy_trace_in_rationals() {
        let r = |n: i64| BigRational::from_integer(n.into());
        let m = Modulation::from_vecs(vec![r(1), r(2), r(3)], vec![r(0), r(0), r(0)]).unwrap();
        let f = m.monodromy_poly(0);
        assert_eq!(f.det(), Poly::one());
        // tr F(x) for α = (1,2,3), β ≡ 0 has zero constant term.
        assert_eq!(f.trace().coeff(0), r(0));
    }

    #[test]
    fn ortho_poly_examples() {
        let m = md(&[1.0, 1.0], &[0.0, 0.0]);
        let t = m.ortho_polys(0, 2);
        assert_eq!(t.polys[0], Poly::one());
        assert_eq!(t.polys[1].coeffs(), &[0.0, 1.0]);
        assert_eq!(t.polys[2].coeffs(), &[-1.0, 0.0, 1.0]);
        for i in 0..6 {
            assert!(m.turan_identity_residual(i, &0.37) < 1e-14);
        }

        let m = md(&[2.0, 0.5, 3.0], &[0.4, -1.0, 0.0]);
        let t = m.ortho_polys(0, 1);
        assert_eq!(t.polys[1].coeffs(), &[-0.2, 0.5]);
    }

    #[test]
    fn leading_coefficients() {
        let m = md(&[2.0, 0.5, 3.0], &[0.4, -1.0, 0.0]);
        let t = m.ortho_polys(1, 7);
        let mut prod = 1.0;
        for n in 0..=7usize {
            assert!((t.polys[n].leading() - 1.0 / prod).abs() < 1e-12 / prod.min(1.0));
            assert_eq!(t.polys[n].degree(), Some(n));
            prod *= m.alpha().at(1 + n as i64);
        }
    }

    #[test]
    fn dw_matrix_reference_pair() {
        let m = md(&[1.0, 1.0], &[0.0, 0.0]);
        assert_eq!(m.dw_matrix(0), Mat2::new(0.0, 1.0, -1.0, 0.0));
    }

    #[test]
    fn derivative_identity_examples() {
        let m = md(&[1.0], &[0.0]);
        assert_eq!(m.derivative_identity_residual(1, &0.0), 0.0);
        let s5 = 5f64.sqrt();
        let m = md(&[1.0, 2.0], &[s5, s5]);
        assert!(m.derivative_identity_residual(4, &0.5) < 1e-10);
    }

    #[test]
    fn single_precision_monodromy() {
        let m = Modulation::from_vecs(vec![1.0f32, 2.0], vec![0.0, 0.0]).unwrap();
        let f = m.monodromy(0, &0.3f32);
        assert!((f.det() - 1.0).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn transfer_det(m in modulation(6), j in -20i64..20, lam in -10.0f64..10.0) {
            let t = m.transfer_matrix(j, &lam);
            let want = m.alpha().at(j - 1) / m.alpha().at(j);
            prop_assert!((t.det() - want).abs() <= 1e-14 * want.max(1.0));
        }

        #[test]
        fn monodromy_det_one(m in modulation(6), i in 0i64..6) {
            for k in 0..=40 {
                let lam = -10.0 + 0.5 * k as f64;
                let f = m.monodromy(i, &lam);
                let scale = f.max_abs().powi(2).max(1.0);
                prop_assert!((f.det() - 1.0).abs() < 1e-12 * scale);
            }
        }

        #[test]
        fn poly_monodromy_evaluates_consistently(m in modulation(6), i in 0i64..6, lam in -3.0f64..3.0) {
            let a = m.monodromy_poly(i).eval(&lam);
            let b = m.monodromy(i, &lam);
            prop_assert!(close(&a, &b, 1e-12 * b.max_abs().max(1.0)));
        }

        #[test]
        fn product_form(m in modulation(8), i in 0i64..8, n in 1usize..=20) {
            prop_assert!(m.product_form_residual(i, n) < 1e-12);
        }

        #[test]
        fn turan_identity(m in modulation(6), i in 0usize..=30, x in -3.0f64..3.0) {
            prop_assert!(m.turan_identity_residual(i, &x) < 1e-10);
        }

        #[test]
        fn derivative_identity(m in modulation(6), n in 1usize..=12, x in -3.0f64..3.0) {
            prop_assert!(m.derivative_identity_residual(n, &x) < 1e-10);
        }

        #[test]
        fn conjugation_shift(m in modulation(6), i in -6i64..6, lam in -3.0f64..3.0) {
            let scale = m.monodromy(i, &lam).max_abs().max(1.0) * m.transfer_matrix(i, &lam).max_abs().max(1.0).powi(2);
            prop_assert!(m.conjugation_residual(i, &lam) < 1e-10 * scale);
        }
    }
}
