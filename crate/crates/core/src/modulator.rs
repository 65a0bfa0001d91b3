//! Construction and classification of modulating sequences.

use crate::error::{Error, Result};
use crate::mat2::{ordered_product, Mat2};
use crate::periodic::{Modulation, PeriodicSeq};
use crate::poly::Poly;
use crate::roots::{polish, real_roots};
use crate::scalar::Scalar;
use serde::Serialize;

pub const DEFAULT_TOL: f64 = 1e-10;

/// A modulation whose monodromy at 0 is `γ·Id`.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalPair {
    modulation: Modulation<f64>,
    gamma: f64,
    residual: f64,
}

impl CriticalPair {
    pub fn modulation(&self) -> &Modulation<f64> {
        &self.modulation
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn period(&self) -> usize {
        self.modulation.period()
    }

    pub fn dw_matrix(&self, i: i64) -> Mat2<f64> {
        self.modulation.dw_matrix(i)
    }

    /// `w'_{N-1}(0) (w^{[1]}_{N-1})'(0) - w'_N(0) (w^{[1]}_{N-2})'(0)`; strictly positive
    /// for every critical pair.
    pub fn nondegeneracy_margin(&self) -> f64 {
        let n = self.period() as i64;
        let w = self.modulation.ortho_polys(0, n as usize);
        let w1 = self.modulation.ortho_polys(1, n as usize);
        let d = |p: Poly<f64>| p.derivative_at_zero();
        d(w.w(n - 1)) * d(w1.w(n - 1)) - d(w.w(n)) * d(w1.w(n - 2))
    }

    /// Largest `‖monodromy(i, 0) - γ Id‖` over all starting residues.
    pub fn residual_all_starts(&self) -> f64 {
        (0..self.period() as i64)
            .map(|i| (self.modulation.monodromy(i, &0.0) - Mat2::diag(self.gamma)).max_abs())
            .fold(0.0, f64::max)
    }
}

/// `r_i = α_{i-1}/α_i`, `q_i = β_i/α_i`.
pub fn ratios<T: Scalar>(m: &Modulation<T>) -> (PeriodicSeq<T>, PeriodicSeq<T>) {
    let n = m.period() as i64;
    let a = m.alpha();
    let b = m.beta();
    let r = (0..n).map(|i| a.at(i - 1) / a.at(i)).collect();
    let q = (0..n).map(|i| b.at(i) / a.at(i)).collect();
    (
        PeriodicSeq::new(r).expect("nonempty"),
        PeriodicSeq::new(q).expect("nonempty"),
    )
}

/// Inverts [`ratios`]: `α_i = ∏_{k=i+1}^{N-1} r_k`, `β_i = α_i q_i`.
///
/// `tol` bounds `|r_0 ⋯ r_{N-1} - 1|`.
pub fn from_ratio_seqs<T: Scalar>(
    r: &PeriodicSeq<T>,
    q: &PeriodicSeq<T>,
    tol: &T,
) -> Result<Modulation<T>> {
    if r.period() != q.period() {
        return Err(Error::Precondition(format!(
            "r has period {} but q has period {}",
            r.period(),
            q.period()
        )));
    }
    if !r.is_positive() {
        return Err(Error::Precondition(format!("r must be strictly positive, got {:?}", r.values())));
    }
    let prod = r.values().iter().cloned().fold(T::one(), |p, v| p * v);
    if (prod.clone() - T::one()).abs_val() > *tol {
        return Err(Error::Precondition(format!(
            "product of r is {prod:?}, expected 1"
        )));
    }
    let n = r.period();
    let mut alpha = vec![T::one(); n];
    for i in (0..n.saturating_sub(1)).rev() {
        alpha[i] = alpha[i + 1].clone() * r.values()[i + 1].clone();
    }
    let beta = alpha
        .iter()
        .zip(q.values())
        .map(|(a, q)| a.clone() * q.clone())
        .collect();
    Modulation::from_vecs(alpha, beta)
}

/// Accepts `m` if `‖F(0) - γ Id‖ < tol`, with `γ` the sign of `F(0)_{22}`.
pub fn check_critical(m: &Modulation<f64>, tol: f64) -> Result<CriticalPair> {
    let f = m.monodromy(0, &0.0);
    let f22 = f.m[1][1];
    let gamma = if f22 >= 0.0 { 1.0 } else { -1.0 };
    let residual = (f.clone() - Mat2::diag(gamma)).max_abs();
    if residual.is_nan() || residual >= tol {
        return Err(Error::NotCritical {
            residual,
            tol,
            matrix: f.to_array(),
        });
    }
    Ok(CriticalPair {
        modulation: m.clone(),
        gamma,
        residual,
    })
}

/// `Some(γ)` when `F(0) = γ Id` holds exactly.
pub fn exact_gamma<T: Scalar>(m: &Modulation<T>) -> Option<T> {
    let f = m.monodromy(0, &T::zero());
    [T::one(), -T::one()]
        .into_iter()
        .find(|g| f == Mat2::diag(g.clone()))
}

/// `tr F(0)` for `β ≡ q`, as a polynomial in `q`.
pub fn trace_poly_in_q<T: Scalar>(alpha: &PeriodicSeq<T>) -> Result<Poly<T>> {
    if !alpha.is_positive() {
        return Err(Error::Domain(format!("alpha must be strictly positive, got {:?}", alpha.values())));
    }
    let n = alpha.period() as i64;
    let f = ordered_product((0..n).map(|j| {
        let aj = alpha.at(j);
        Mat2::companion(
            Poly::constant(alpha.at(j - 1) / aj.clone()),
            Poly::linear(T::zero(), -(T::one() / aj)),
        )
    }));
    Ok(f.trace())
}

/// Real `q` making `tr F(0)` vanish for `β ≡ q`; ascending.
pub fn critical_qs(alpha: &PeriodicSeq<f64>) -> Result<Vec<f64>> {
    let p = trace_poly_in_q(alpha)?;
    Ok(real_roots(&p))
}

/// `(α, β ≡ q)` at period `M` with `tr F(0) = 0`, re-declared at period `2M`.
pub fn critical_pair_from_q(alpha: &PeriodicSeq<f64>, q: f64, tol: f64) -> Result<CriticalPair> {
    let p = trace_poly_in_q(alpha)?;
    let q = polish(&p, q);
    let m = Modulation::new(alpha.clone(), PeriodicSeq::constant(q, alpha.period())?)?;
    double_period(&m, tol)
}

/// Doubles the period of a pair with `tr F(0) = 0`; the result has `F(0) = -Id`.
pub fn double_period(m: &Modulation<f64>, tol: f64) -> Result<CriticalPair> {
    let tr = m.monodromy(0, &0.0).trace();
    if !(tr.abs() < tol) {
        return Err(Error::Precondition(format!(
            "period doubling needs tr F(0) = 0, got {tr:e}"
        )));
    }
    let pair = check_critical(&m.repeated(2), tol)?;
    if pair.gamma != -1.0 {
        return Err(Error::Internal("doubled pair has gamma = +1".into()));
    }
    Ok(pair)
}

/// `β ≡ 0`, even period `2M`: critical iff the even- and odd-index products of α agree.
pub fn even_zero_beta(alpha: &PeriodicSeq<f64>, tol: f64) -> Result<CriticalPair> {
    let n = alpha.period();
    if n % 2 != 0 {
        return Err(Error::Precondition(format!("even period required, got {n}")));
    }
    let even: f64 = alpha.values().iter().step_by(2).product();
    let odd: f64 = alpha.values().iter().skip(1).step_by(2).product();
    if (even - odd).abs() > 1e-12 * even.max(odd) {
        return Err(Error::ProductMismatch { even, odd });
    }
    let m = Modulation::new(alpha.clone(), PeriodicSeq::constant(0.0, n)?)?;
    let pair = check_critical(&m, tol)?;
    let expected = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
    if pair.gamma != expected {
        return Err(Error::Internal(format!(
            "gamma {} differs from (-1)^M = {expected}",
            pair.gamma
        )));
    }
    Ok(pair)
}

/// `α ≡ 1`, `β ≡ 2 cos(k0 π / N)`, `1 ≤ k0 < N`.
pub fn cosine_beta(n: usize, k0: usize, tol: f64) -> Result<CriticalPair> {
    if n < 2 || k0 == 0 || k0 >= n {
        return Err(Error::Precondition(format!("need N >= 2 and 1 <= k0 < N, got N={n}, k0={k0}")));
    }
    let b = 2.0 * (k0 as f64 * std::f64::consts::PI / n as f64).cos();
    let m = Modulation::new(PeriodicSeq::constant(1.0, n)?, PeriodicSeq::constant(b, n)?)?;
    check_critical(&m, tol)
}

/// A catalogued critical pair together with the `γ` its construction predicts.
#[derive(Clone, Debug)]
pub struct NamedPair {
    pub name: String,
    pub pair: CriticalPair,
    pub expected_gamma: f64,
}

/// The stock critical constructions: zero-β even periods, constant `2cos(k₀π/N)` diagonals,
/// period doublings at the real zeros of `tr F(0)` in `q`, and the alternating β example.
pub fn standard_constructions(tol: f64) -> Result<Vec<NamedPair>> {
    let mut out = Vec::new();
    let mut push = |name: String, pair: CriticalPair, expected_gamma: f64| {
        out.push(NamedPair {
            name,
            pair,
            expected_gamma,
        })
    };
    for alpha in [vec![1.0, 1.0], vec![1.0, 2.0, 2.0, 1.0], vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0]] {
        let half = alpha.len() / 2;
        let gamma = if half % 2 == 0 { 1.0 } else { -1.0 };
        let pair = even_zero_beta(&PeriodicSeq::new(alpha.clone())?, tol)?;
        push(format!("even_zero_beta alpha={alpha:?}"), pair, gamma);
    }
    for n in 2..=6usize {
        for k0 in 1..n {
            let gamma = if (n + k0) % 2 == 0 { 1.0 } else { -1.0 };
            push(format!("cosine_beta N={n} k0={k0}"), cosine_beta(n, k0, tol)?, gamma);
        }
    }
    let unit = Modulation::from_vecs(vec![1.0], vec![0.0])?;
    push("doubled alpha=[1] beta=[0]".into(), double_period(&unit, tol)?, -1.0);
    for alpha in [vec![1.0, 2.0], vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0, 4.0]] {
        let seq = PeriodicSeq::new(alpha.clone())?;
        for q in critical_qs(&seq)? {
            push(
                format!("doubled alpha={alpha:?} q={q:.6}"),
                critical_pair_from_q(&seq, q, tol)?,
                -1.0,
            );
        }
    }
    let alt = Modulation::from_vecs(vec![1.0; 4], vec![1.0, 0.0, -1.0, 0.0])?;
    push("alternating beta=[1,0,-1,0]".into(), check_critical(&alt, tol)?, 1.0);
    Ok(out)
}

/// The M real zeros of `x ↦ tr F(x)`, ascending.
pub fn trace_zeros_in_x(m: &Modulation<f64>) -> Vec<f64> {
    real_roots(&m.monodromy_poly(0).trace())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Bulk,
    SoftEdge,
    HardEdge,
    /// `|tr F(0)| > 2`; outside the three named regimes.
    Hyperbolic,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub trace0: f64,
    pub diagonalisable: bool,
    pub gamma: Option<f64>,
    /// `‖F(0) - γ Id‖` for the closer of `γ = ±1`.
    pub residual: f64,
}

pub fn classify_modulation(m: &Modulation<f64>, tol: f64) -> RegimeReport {
    let f = m.monodromy(0, &0.0);
    let tr = f.trace();
    let gamma = if f.m[1][1] >= 0.0 { 1.0 } else { -1.0 };
    let residual = (f - Mat2::diag(gamma)).max_abs();
    let (regime, diagonalisable, g) = if residual < tol {
        (Regime::SoftEdge, true, Some(gamma))
    } else if (tr.abs() - 2.0).abs() < tol {
        (Regime::HardEdge, false, None)
    } else if tr.abs() < 2.0 {
        (Regime::Bulk, true, None)
    } else {
        (Regime::Hyperbolic, true, None)
    };
    RegimeReport {
        regime,
        trace0: tr,
        diagonalisable,
        gamma: g,
        residual,
    }
}

pub fn classify_regime(r: &PeriodicSeq<f64>, q: &PeriodicSeq<f64>, tol: f64) -> Result<RegimeReport> {
    let m = from_ratio_seqs(r, q, &1e-12)?;
    Ok(classify_modulation(&m, tol))
}

/// First `q` over the grid `candidates^N` whose pair is in the hard-edge regime.
pub fn find_hard_edge_witness(
    r: &PeriodicSeq<f64>,
    candidates: &[f64],
    tol: f64,
) -> Option<(PeriodicSeq<f64>, RegimeReport)> {
    let n = r.period();
    let total = candidates.len().checked_pow(n as u32)?;
    (0..total).find_map(|mut idx| {
        let mut q = Vec::with_capacity(n);
        for _ in 0..n {
            q.push(candidates[idx % candidates.len()]);
            idx /= candidates.len();
        }
        let q = PeriodicSeq::new(q).ok()?;
        let rep = classify_regime(r, &q, tol).ok()?;
        (rep.regime == Regime::HardEdge).then_some((q, rep))
    })
}

/// `constant + λ·slope`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineMat2 {
    pub constant: Mat2<f64>,
    pub slope: Mat2<f64>,
}

impl AffineMat2 {
    pub fn eval(&self, lambda: f64) -> Mat2<f64> {
        self.constant.clone() + self.slope.scale(&lambda)
    }

    pub fn to_poly(&self) -> Mat2<Poly<f64>> {
        Mat2::new(
            Poly::linear(self.constant.m[0][0], self.slope.m[0][0]),
            Poly::linear(self.constant.m[0][1], self.slope.m[0][1]),
            Poly::linear(self.constant.m[1][0], self.slope.m[1][0]),
            Poly::linear(self.constant.m[1][1], self.slope.m[1][1]),
        )
    }
}

fn check_limits(pair: &CriticalPair, s: &PeriodicSeq<f64>, z: &PeriodicSeq<f64>) -> Result<()> {
    let n = pair.period();
    if s.period() != n || z.period() != n {
        return Err(Error::Precondition(format!(
            "s and z must have period {n}, got {} and {}",
            s.period(),
            z.period()
        )));
    }
    Ok(())
}

/// `Σ_j (1/α_{i+j}) [∏_{m>j} B̂^{i+m}(0)] [[0,0],[s_{i+j}, z_{i+j}]] [∏_{m<j} B̂^{i+m}(0)]`.
pub fn d_matrix(pair: &CriticalPair, s: &PeriodicSeq<f64>, z: &PeriodicSeq<f64>, i: i64) -> Result<Mat2<f64>> {
    check_limits(pair, s, z)?;
    let m = pair.modulation();
    let n = pair.period();
    let mut acc = Mat2::zero();
    for j in 0..n {
        let k = i + j as i64;
        let after = m.transfer_product(k + 1, n - 1 - j, &0.0);
        let before = m.transfer_product(i, j, &0.0);
        let mid = Mat2::new(0.0, 0.0, s.at(k), z.at(k)).scale(&(1.0 / m.alpha().at(k)));
        acc = acc + after * mid * before;
    }
    Ok(acc)
}

/// Limit `𝓒_i(λ) = α_{i-1}(𝓓_i + λ Ĉ^i(1))` of `a_{n+N-1}(X_n(λ) - γ Id)` along `n ≡ i`.
pub fn c_limit_matrix(
    pair: &CriticalPair,
    s: &PeriodicSeq<f64>,
    z: &PeriodicSeq<f64>,
    i: i64,
) -> Result<AffineMat2> {
    let a = pair.modulation().alpha().at(i - 1);
    let d = d_matrix(pair, s, z, i)?;
    Ok(AffineMat2 {
        constant: d.scale(&a),
        slope: pair.dw_matrix(i).scale(&a),
    })
}

/// Complement of Λ: the closed set where `h_0 ≤ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GapInterval {
    Empty,
    Point { at: f64 },
    Interval { lo: f64, hi: f64 },
}

impl GapInterval {
    pub fn width(&self) -> f64 {
        match *self {
            GapInterval::Interval { lo, hi } => hi - lo,
            _ => 0.0,
        }
    }

    /// Open intervals making up Λ.
    pub fn complement(&self) -> Vec<(f64, f64)> {
        let inf = f64::INFINITY;
        match *self {
            GapInterval::Empty => vec![(-inf, inf)],
            GapInterval::Point { at } => vec![(-inf, at), (at, inf)],
            GapInterval::Interval { lo, hi } => vec![(-inf, lo), (hi, inf)],
        }
    }

    pub fn distance(&self, x: f64) -> f64 {
        match *self {
            GapInterval::Empty => f64::INFINITY,
            GapInterval::Point { at } => (x - at).abs(),
            GapInterval::Interval { lo, hi } => (lo - x).max(x - hi).max(0.0),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HPolynomial {
    pub i: i64,
    /// `h_i(λ) = 4 det 𝓒_i(λ) - (tr 𝓒_i(λ))^2`
    pub h: Poly<f64>,
    pub h0: Poly<f64>,
    pub lambda_set: Vec<(f64, f64)>,
    pub interval: GapInterval,
}

impl HPolynomial {
    pub fn in_lambda(&self, x: f64) -> bool {
        self.h0.eval(&x) > 0.0
    }
}

/// Roots closer than this collapse the gap to a point.
pub const POINT_GAP_TOL: f64 = 1e-8;

fn h_of(c: &AffineMat2) -> Poly<f64> {
    let p = c.to_poly();
    let four = Poly::constant(4.0);
    let tr = p.trace();
    four * p.det() - tr.clone() * tr
}

fn gap_of(h0: &Poly<f64>) -> GapInterval {
    let (c, b, a) = (h0.coeff(0), h0.coeff(1), h0.coeff(2));
    let disc = b * b - 4.0 * a * c;
    let centre = -b / (2.0 * a);
    let half = disc.abs().sqrt() / (2.0 * a);
    if half <= POINT_GAP_TOL / 2.0 {
        return GapInterval::Point { at: centre };
    }
    if disc < 0.0 {
        return GapInterval::Empty;
    }
    // stable pair of roots
    let qv = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if qv == 0.0 {
        (-half, half)
    } else {
        (qv / a, c / qv)
    };
    GapInterval::Interval {
        lo: r1.min(r2),
        hi: r1.max(r2),
    }
}

pub fn compute_h(pair: &CriticalPair, s: &PeriodicSeq<f64>, z: &PeriodicSeq<f64>, i: i64) -> Result<HPolynomial> {
    let h = h_of(&c_limit_matrix(pair, s, z, i)?);
    let h0 = h_of(&c_limit_matrix(pair, s, z, 0)?);
    for p in [&h, &h0] {
        if p.degree() != Some(2) || p.leading() <= 0.0 {
            return Err(Error::Internal(format!(
                "h must be quadratic with positive leading coefficient, got {:?}",
                p.coeffs()
            )));
        }
    }
    let interval = gap_of(&h0);
    Ok(HPolynomial {
        i,
        h,
        h0,
        lambda_set: interval.complement(),
        interval,
    })
}
