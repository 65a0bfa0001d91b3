//! Full Jacobi coefficient sequences built from a growth law and a modulation.

use crate::error::{Error, Result};
use crate::mat2::{ordered_product, Mat2};
use crate::modulator::{check_critical, ratios};
use crate::periodic::{Modulation, PeriodicSeq};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Named growth sequence `ã_k`.
#[derive(Clone, Debug, PartialEq)]
pub enum GrowthLaw {
    /// `scale·(k+1)^exponent`
    Power { scale: f64, exponent: f64 },
    /// `slope·k + intercept`
    Linear { slope: f64, intercept: f64 },
    /// `scale·ln(k + offset)`
    Log { scale: f64, offset: f64 },
    Explicit(Vec<f64>),
}

/// Asymptotics of `k / ã_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KOverA {
    /// `k/ã_k → ∞`
    Infinite,
    Bounded,
    /// `k/ã_k → 0`
    Zero,
}

impl GrowthLaw {
    pub fn power(exponent: f64) -> Self {
        GrowthLaw::Power {
            scale: 1.0,
            exponent,
        }
    }

    pub fn value(&self, k: usize) -> Result<f64> {
        let kf = k as f64;
        Ok(match self {
            GrowthLaw::Power { scale, exponent } => scale * (kf + 1.0).powf(*exponent),
            GrowthLaw::Linear { slope, intercept } => slope * kf + intercept,
            GrowthLaw::Log { scale, offset } => scale * (kf + offset).ln(),
            GrowthLaw::Explicit(v) => *v.get(k).ok_or_else(|| {
                Error::Domain(format!("explicit growth sequence has {} values, index {k} requested", v.len()))
            })?,
        })
    }

    /// `lim (ã_k - ã_{k-1})` when it exists and is finite.
    pub fn increment_limit(&self) -> Option<f64> {
        match *self {
            GrowthLaw::Power { exponent, .. } if exponent < 1.0 => Some(0.0),
            GrowthLaw::Power { scale, exponent } if exponent == 1.0 => Some(scale),
            GrowthLaw::Power { .. } => None,
            GrowthLaw::Linear { slope, .. } => Some(slope),
            GrowthLaw::Log { .. } => Some(0.0),
            GrowthLaw::Explicit(_) => None,
        }
    }

    pub fn k_over_a(&self) -> Option<KOverA> {
        match *self {
            GrowthLaw::Power { exponent, .. } if exponent < 1.0 => Some(KOverA::Infinite),
            GrowthLaw::Power { exponent, .. } if exponent == 1.0 => Some(KOverA::Bounded),
            GrowthLaw::Power { .. } => Some(KOverA::Zero),
            GrowthLaw::Linear { slope, .. } if slope > 0.0 => Some(KOverA::Bounded),
            GrowthLaw::Linear { .. } => Some(KOverA::Infinite),
            GrowthLaw::Log { .. } => Some(KOverA::Infinite),
            GrowthLaw::Explicit(_) => None,
        }
    }

    /// `Some(true)` when `Σ 1/ã_k` diverges, `Some(false)` when it converges.
    pub fn reciprocal_sum_diverges(&self) -> Option<bool> {
        match *self {
            GrowthLaw::Power { exponent, .. } => Some(exponent <= 1.0),
            GrowthLaw::Linear { .. } | GrowthLaw::Log { .. } => Some(true),
            GrowthLaw::Explicit(_) => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GrowthLawJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    law: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
}

impl TryFrom<GrowthLawJson> for GrowthLaw {
    type Error = Error;
    fn try_from(j: GrowthLawJson) -> Result<Self> {
        let bad = |m: String| Error::Domain(format!("a_tilde: {m}"));
        match (j.law, j.params, j.values) {
            (None, None, Some(values)) => {
                if values.is_empty() {
                    return Err(bad("values must be nonempty".into()));
                }
                Ok(GrowthLaw::Explicit(values))
            }
            (Some(law), params, None) => {
                let mut p = params.unwrap_or_default();
                let mut take = |key: &str, default: Option<f64>| {
                    p.remove(key)
                        .or(default)
                        .ok_or_else(|| bad(format!("law '{law}' needs parameter '{key}'")))
                };
                let out = match law.as_str() {
                    "power" => GrowthLaw::Power {
                        scale: take("scale", Some(1.0))?,
                        exponent: take("exponent", None)?,
                    },
                    "linear" => GrowthLaw::Linear {
                        slope: take("slope", None)?,
                        intercept: take("intercept", None)?,
                    },
                    "log" => GrowthLaw::Log {
                        scale: take("scale", Some(1.0))?,
                        offset: take("offset", None)?,
                    },
                    other => return Err(bad(format!("unknown law '{other}'"))),
                };
                if let Some(k) = p.keys().next() {
                    return Err(bad(format!("unknown parameter '{k}' for law '{law}'")));
                }
                Ok(out)
            }
            _ => Err(bad("expected either {law, params} or {values}".into())),
        }
    }
}

impl From<&GrowthLaw> for GrowthLawJson {
    fn from(g: &GrowthLaw) -> Self {
        let law = |name: &str, kv: &[(&str, f64)]| GrowthLawJson {
            law: Some(name.into()),
            params: Some(kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()),
            values: None,
        };
        match g {
            GrowthLaw::Power { scale, exponent } => law("power", &[("scale", *scale), ("exponent", *exponent)]),
            GrowthLaw::Linear { slope, intercept } => law("linear", &[("slope", *slope), ("intercept", *intercept)]),
            GrowthLaw::Log { scale, offset } => law("log", &[("scale", *scale), ("offset", *offset)]),
            GrowthLaw::Explicit(v) => GrowthLawJson {
                law: None,
                params: None,
                values: Some(v.clone()),
            },
        }
    }
}

impl Serialize for GrowthLaw {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GrowthLawJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GrowthLaw {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        GrowthLawJson::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecKind {
    /// `a_{kN+i} = α_i ã_k`, `b_{kN+i} = β_i ã_k`
    Modulated,
    /// `a_n = α_n ã_n`, `b_n = β_n ã_n`
    PeriodicModulated,
    /// `a_n = α_n ã_n + d_n`, `b_n = β_n ã_n + d'_n`
    AdditivePerturbed,
    Custom,
}

type CoefFn = Arc<dyn Fn(usize) -> (f64, f64) + Send + Sync>;

#[derive(Clone)]
enum Source {
    Law {
        kind: SpecKind,
        modulation: Modulation<f64>,
        a_tilde: GrowthLaw,
        d: Option<PeriodicSeq<f64>>,
        d_prime: Option<PeriodicSeq<f64>>,
    },
    Custom {
        modulation: Modulation<f64>,
        f: CoefFn,
    },
}

/// Generator of the sequences `(a_n, b_n)`.
#[derive(Clone)]
pub struct JacobiSpec {
    source: Source,
    truncation: Option<usize>,
}

impl fmt::Debug for JacobiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Source::Law {
                kind,
                modulation,
                a_tilde,
                d,
                d_prime,
            } => f
                .debug_struct("JacobiSpec")
                .field("kind", kind)
                .field("modulation", modulation)
                .field("a_tilde", a_tilde)
                .field("d", d)
                .field("d_prime", d_prime)
                .field("truncation", &self.truncation)
                .finish(),
            Source::Custom { modulation, .. } => f
                .debug_struct("JacobiSpec")
                .field("kind", &SpecKind::Custom)
                .field("modulation", modulation)
                .field("truncation", &self.truncation)
                .finish(),
        }
    }
}

impl JacobiSpec {
    pub fn modulated(modulation: Modulation<f64>, a_tilde: GrowthLaw) -> Self {
        Self::law(SpecKind::Modulated, modulation, a_tilde, None, None)
    }

    pub fn periodic_modulated(modulation: Modulation<f64>, a_tilde: GrowthLaw) -> Self {
        Self::law(SpecKind::PeriodicModulated, modulation, a_tilde, None, None)
    }

    pub fn additive_perturbed(
        modulation: Modulation<f64>,
        a_tilde: GrowthLaw,
        d: PeriodicSeq<f64>,
        d_prime: PeriodicSeq<f64>,
    ) -> Result<Self> {
        let n = modulation.period();
        if d.period() != n || d_prime.period() != n {
            return Err(Error::Domain(format!(
                "d and d_prime must have period {n}, got {} and {}",
                d.period(),
                d_prime.period()
            )));
        }
        Ok(Self::law(SpecKind::AdditivePerturbed, modulation, a_tilde, Some(d), Some(d_prime)))
    }

    /// Arbitrary coefficients `n ↦ (a_n, b_n)`; `modulation` supplies the limiting `r`, `q`.
    pub fn custom(modulation: Modulation<f64>, f: impl Fn(usize) -> (f64, f64) + Send + Sync + 'static) -> Self {
        JacobiSpec {
            source: Source::Custom {
                modulation,
                f: Arc::new(f),
            },
            truncation: None,
        }
    }

    fn law(
        kind: SpecKind,
        modulation: Modulation<f64>,
        a_tilde: GrowthLaw,
        d: Option<PeriodicSeq<f64>>,
        d_prime: Option<PeriodicSeq<f64>>,
    ) -> Self {
        JacobiSpec {
            source: Source::Law {
                kind,
                modulation,
                a_tilde,
                d,
                d_prime,
            },
            truncation: None,
        }
    }

    /// Freezes the sequences `N`-periodically after index `K + N - 1`.
    pub fn truncated(&self, k: usize) -> Self {
        JacobiSpec {
            source: self.source.clone(),
            truncation: Some(k),
        }
    }

    pub fn truncation(&self) -> Option<usize> {
        self.truncation
    }

    pub fn kind(&self) -> SpecKind {
        match &self.source {
            Source::Law { kind, .. } => *kind,
            Source::Custom { .. } => SpecKind::Custom,
        }
    }

    pub fn modulation(&self) -> &Modulation<f64> {
        match &self.source {
            Source::Law { modulation, .. } | Source::Custom { modulation, .. } => modulation,
        }
    }

    pub fn a_tilde(&self) -> Option<&GrowthLaw> {
        match &self.source {
            Source::Law { a_tilde, .. } => Some(a_tilde),
            Source::Custom { .. } => None,
        }
    }

    pub fn period(&self) -> usize {
        self.modulation().period()
    }

    fn base(&self, n: usize) -> Result<(f64, f64)> {
        match &self.source {
            Source::Law {
                kind,
                modulation: m,
                a_tilde,
                d,
                d_prime,
            } => {
                let big_n = m.period();
                let ni = n as i64;
                Ok(match kind {
                    SpecKind::Modulated => {
                        let (k, i) = (n / big_n, (n % big_n) as i64);
                        let t = a_tilde.value(k)?;
                        (m.alpha().at(i) * t, m.beta().at(i) * t)
                    }
                    SpecKind::PeriodicModulated => {
                        let t = a_tilde.value(n)?;
                        (m.alpha().at(ni) * t, m.beta().at(ni) * t)
                    }
                    SpecKind::AdditivePerturbed => {
                        let t = a_tilde.value(n)?;
                        let d = d.as_ref().map_or(0.0, |d| d.at(ni));
                        let dp = d_prime.as_ref().map_or(0.0, |d| d.at(ni));
                        (m.alpha().at(ni) * t + d, m.beta().at(ni) * t + dp)
                    }
                    SpecKind::Custom => unreachable!("custom specs carry a closure"),
                })
            }
            Source::Custom { f, .. } => Ok(f(n)),
        }
    }

    /// `(a_n, b_n)`.
    pub fn generate(&self, n: usize) -> Result<(f64, f64)> {
        let src = match self.truncation {
            Some(k) if n >= k + self.period() => k + (n - k) % self.period(),
            _ => n,
        };
        let (a, b) = self.base(src)?;
        if !(a > 0.0) {
            return Err(Error::Domain(format!("a_{n} = {a} is not positive")));
        }
        Ok((a, b))
    }

    /// `a_0..a_{len-1}`, `b_0..b_{len-1}`.
    pub fn coefficients(&self, len: usize) -> Result<Lattice> {
        let mut a = Vec::with_capacity(len);
        let mut b = Vec::with_capacity(len);
        for n in 0..len {
            let (an, bn) = self.generate(n)?;
            a.push(an);
            b.push(bn);
        }
        Ok(Lattice {
            a,
            b,
            period: self.period(),
        })
    }

    /// Limits `s_n = lim (r_n a_n - a_{n-1})` and `z_n = lim (q_n a_n - b_n)` along residues.
    ///
    /// Closed form for named growth laws; custom specs are probed at a large index.
    pub fn perturbation_limits(&self) -> Result<PerturbationLimits> {
        if self.truncation.is_some() {
            return Err(Error::Precondition("truncated specs have bounded coefficients".into()));
        }
        let m = self.modulation();
        let n = m.period();
        let (r, q) = ratios(m);
        let a = m.alpha();
        let zero = PeriodicSeq::constant(0.0, n)?;
        match &self.source {
            Source::Law {
                kind,
                a_tilde,
                d,
                d_prime,
                ..
            } => {
                let l = a_tilde.increment_limit().ok_or_else(|| {
                    Error::Precondition("increments of a_tilde have no finite limit".into())
                })?;
                let (s, z) = match kind {
                    SpecKind::Modulated => {
                        let mut s = vec![0.0; n];
                        s[0] = a.at(-1) * l;
                        (PeriodicSeq::new(s)?, zero)
                    }
                    SpecKind::PeriodicModulated => (a.rotated(-1).map(|v| v * l), zero),
                    SpecKind::AdditivePerturbed => {
                        let d = d.clone().unwrap_or_else(|| zero.clone());
                        let dp = d_prime.clone().unwrap_or_else(|| zero.clone());
                        let s = (0..n as i64)
                            .map(|i| a.at(i - 1) * l + r.at(i) * d.at(i) - d.at(i - 1))
                            .collect();
                        let z = (0..n as i64).map(|i| q.at(i) * d.at(i) - dp.at(i)).collect();
                        (PeriodicSeq::new(s)?, PeriodicSeq::new(z)?)
                    }
                    SpecKind::Custom => unreachable!("custom specs carry a closure"),
                };
                Ok(PerturbationLimits { s, z, analytic: true })
            }
            Source::Custom { .. } => {
                let base = (1usize << 20) / n * n;
                let mut s = Vec::with_capacity(n);
                let mut z = Vec::with_capacity(n);
                for i in 0..n {
                    let idx = base + n + i;
                    let (an, bn) = self.generate(idx)?;
                    let (ap, _) = self.generate(idx - 1)?;
                    s.push(r.at(i as i64) * an - ap);
                    z.push(q.at(i as i64) * an - bn);
                }
                Ok(PerturbationLimits {
                    s: PeriodicSeq::new(s)?,
                    z: PeriodicSeq::new(z)?,
                    analytic: false,
                })
            }
        }
    }

    /// `|a_{n-1}/a_n - r_n|`.
    pub fn ratio_deviation(&self, n: usize) -> Result<f64> {
        let (r, _) = ratios(self.modulation());
        let (a0, _) = self.generate(n - 1)?;
        let (a1, _) = self.generate(n)?;
        Ok((a0 / a1 - r.at(n as i64)).abs())
    }

    pub fn to_json(&self) -> Result<SpecJson> {
        match &self.source {
            Source::Law {
                kind,
                modulation,
                a_tilde,
                d,
                d_prime,
            } => Ok(SpecJson {
                kind: *kind,
                n: modulation.period(),
                alpha: modulation.alpha().values().to_vec(),
                beta: modulation.beta().values().to_vec(),
                a_tilde: a_tilde.clone(),
                d: d.as_ref().map(|v| v.values().to_vec()),
                d_prime: d_prime.as_ref().map(|v| v.values().to_vec()),
                k: self.truncation,
            }),
            Source::Custom { .. } => Err(Error::Domain("custom specs are not serialisable".into())),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationLimits {
    pub s: PeriodicSeq<f64>,
    pub z: PeriodicSeq<f64>,
    /// False when estimated from a finite index.
    pub analytic: bool,
}

/// On-disk form of a [`JacobiSpec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecJson {
    pub kind: SpecKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub a_tilde: GrowthLaw,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_prime: Option<Vec<f64>>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl TryFrom<SpecJson> for JacobiSpec {
    type Error = Error;
    fn try_from(j: SpecJson) -> Result<Self> {
        if j.alpha.len() != j.n || j.beta.len() != j.n {
            return Err(Error::Domain(format!(
                "N = {} but alpha has {} and beta has {} values",
                j.n,
                j.alpha.len(),
                j.beta.len()
            )));
        }
        let m = Modulation::from_vecs(j.alpha, j.beta)?;
        let spec = match j.kind {
            SpecKind::Modulated | SpecKind::PeriodicModulated => {
                if j.d.is_some() || j.d_prime.is_some() {
                    return Err(Error::Domain("d and d_prime are only valid for additive_perturbed".into()));
                }
                if j.kind == SpecKind::Modulated {
                    JacobiSpec::modulated(m, j.a_tilde)
                } else {
                    JacobiSpec::periodic_modulated(m, j.a_tilde)
                }
            }
            SpecKind::AdditivePerturbed => {
                let n = j.n;
                let d = PeriodicSeq::new(j.d.unwrap_or_else(|| vec![0.0; n]))?;
                let dp = PeriodicSeq::new(j.d_prime.unwrap_or_else(|| vec![0.0; n]))?;
                JacobiSpec::additive_perturbed(m, j.a_tilde, d, dp)?
            }
            SpecKind::Custom => return Err(Error::Domain("custom specs cannot be read from JSON".into())),
        };
        Ok(match j.k {
            Some(k) => spec.truncated(k),
            None => spec,
        })
    }
}

impl JacobiSpec {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: SpecJson = serde_json::from_str(s).map_err(|e| Error::Domain(format!("spec JSON: {e}")))?;
        j.try_into()
    }
}

/// Materialised coefficients `a_0..a_{L-1}`, `b_0..b_{L-1}`.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub period: usize,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `B_n(x) = [[0, 1], [-a_{n-1}/a_n, (x - b_n)/a_n]]`, `n ≥ 1`.
    pub fn transfer(&self, n: usize, x: f64) -> Mat2<f64> {
        Mat2::companion(self.a[n - 1] / self.a[n], (x - self.b[n]) / self.a[n])
    }

    /// `X_n(x) = B_{n+N-1}(x) ⋯ B_n(x)`.
    pub fn window_matrix(&self, n: usize, x: f64) -> Mat2<f64> {
        ordered_product((n..n + self.period).map(|j| self.transfer(j, x)))
    }

    /// Generalised eigenvector with `u_0, u_1 = init`, up to `u_{n_max}`.
    pub fn eigvec_run(&self, x: f64, n_max: usize, init: (f64, f64)) -> EigvecRun {
        assert!(n_max >= 1 && n_max <= self.len(), "eigvec_run needs a_0..a_{{n_max-1}}");
        let mut mant = Vec::with_capacity(n_max + 1);
        let mut exp = Vec::with_capacity(n_max + 1);
        let (mut prev, mut cur) = init;
        let mut e = 0i32;
        mant.push(prev);
        exp.push(0);
        mant.push(cur);
        exp.push(0);
        for n in 1..n_max {
            let next = ((x - self.b[n]) * cur - self.a[n - 1] * prev) / self.a[n];
            prev = cur;
            cur = next;
            let big = prev.abs().max(cur.abs());
            if big > RESCALE_HI || (big < RESCALE_LO && big > 0.0) {
                let s = big.log2().floor() as i32;
                prev = ldexp(prev, -s);
                cur = ldexp(cur, -s);
                e += s;
            }
            mant.push(cur);
            exp.push(e);
        }
        EigvecRun { x, mant, exp }
    }

    /// Orthonormal polynomials `p_n(x)`, `n ≤ n_max`.
    pub fn poly_run(&self, x: f64, n_max: usize) -> EigvecRun {
        self.eigvec_run(x, n_max, (1.0, (x - self.b[0]) / self.a[0]))
    }
}

const RESCALE_HI: f64 = 1.340_780_792_994_259_7e154; // 2^512
const RESCALE_LO: f64 = 7.458_340_731_200_207e-155; // 2^-512

/// `m·2^e` without intermediate overflow.
pub fn ldexp(m: f64, e: i32) -> f64 {
    let mut v = m;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e)
}

/// A generalised eigenvector stored as mantissas with base-2 exponents.
#[derive(Clone, Debug)]
pub struct EigvecRun {
    pub x: f64,
    mant: Vec<f64>,
    exp: Vec<i32>,
}

impl EigvecRun {
    pub fn n_max(&self) -> usize {
        self.mant.len() - 1
    }

    /// `(m, e)` with `u_n = m·2^e`.
    pub fn scaled(&self, n: usize) -> (f64, i32) {
        (self.mant[n], self.exp[n])
    }

    pub fn log_scale(&self) -> &[i32] {
        &self.exp
    }

    /// `u_n`, possibly infinite or zero when not representable.
    pub fn value(&self, n: usize) -> f64 {
        ldexp(self.mant[n], self.exp[n])
    }

    /// `u_n · 2^{-e_ref}`.
    pub fn rel(&self, n: usize, e_ref: i32) -> f64 {
        ldexp(self.mant[n], self.exp[n] - e_ref)
    }

    /// `ln |u_n|`.
    pub fn ln_abs(&self, n: usize) -> f64 {
        self.mant[n].abs().ln() + self.exp[n] as f64 * std::f64::consts::LN_2
    }

    /// `ln(u_{n-1}^2 + u_n^2)`.
    pub fn ln_pair_norm2(&self, n: usize) -> f64 {
        let e = self.exp[n].max(self.exp[n - 1]);
        let a = self.rel(n - 1, e);
        let b = self.rel(n, e);
        (a * a + b * b).ln() + 2.0 * e as f64 * std::f64::consts::LN_2
    }
}

/// `Σ_{n=from}^{to} |x_{n+N} - x_n|`.
pub fn n_variation(x: &[f64], n: usize, from: usize, to: usize) -> Result<f64> {
    check_range(x.len(), n, from, to)?;
    Ok((from..=to).map(|k| (x[k + n] - x[k]).abs()).sum())
}

/// Operator-norm version of [`n_variation`].
pub fn n_variation_mat(x: &[Mat2<f64>], n: usize, from: usize, to: usize) -> Result<f64> {
    check_range(x.len(), n, from, to)?;
    Ok((from..=to).map(|k| (x[k + n].clone() - x[k].clone()).norm2()).sum())
}

fn check_range(len: usize, n: usize, from: usize, to: usize) -> Result<()> {
    if to < from || to + n >= len {
        return Err(Error::Domain(format!(
            "variation range {from}..={to} with shift {n} needs {} values, have {len}",
            to + n + 1
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CarlemanVerdict {
    Diverging,
    Converging,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct CarlemanReport {
    pub partial_sum: f64,
    pub verdict: CarlemanVerdict,
}

/// Partial sum of `1/a_n` plus a verdict from the growth law; partial sums alone decide nothing.
pub fn carleman_check(spec: &JacobiSpec, n_max: usize) -> Result<CarlemanReport> {
    let lat = spec.coefficients(n_max)?;
    let partial_sum = lat.a.iter().map(|a| 1.0 / a).sum();
    let verdict = if spec.truncation().is_some() {
        // bounded periodic tail
        CarlemanVerdict::Diverging
    } else {
        match spec.a_tilde().and_then(GrowthLaw::reciprocal_sum_diverges) {
            Some(true) => CarlemanVerdict::Diverging,
            Some(false) => CarlemanVerdict::Converging,
            None => CarlemanVerdict::Inconclusive,
        }
    };
    Ok(CarlemanReport { partial_sum, verdict })
}

/// `max |p_{Nk+i}(0) - γ^k w_i(0)|` over `k ≤ k_max`, `i < N`, for a given `γ`.
pub fn periodicity_residual(spec: &JacobiSpec, gamma: f64, k_max: usize) -> Result<f64> {
    let n = spec.period();
    let len = (k_max + 1) * n;
    let lat = spec.coefficients(len)?;
    let run = lat.poly_run(0.0, len - 1);
    let w = spec.modulation().ortho_polys(0, n).eval_all(&0.0);
    let mut worst: f64 = 0.0;
    let mut g = 1.0;
    for k in 0..=k_max {
        for (i, wi) in w.iter().enumerate().take(n) {
            let idx = k * n + i;
            if idx > run.n_max() {
                break;
            }
            worst = worst.max((run.value(idx) - g * wi).abs());
        }
        g *= gamma;
    }
    Ok(worst)
}

/// Periodicity check of `p_n(0)` for a modulated spec with a critical modulation.
pub fn periodicity_check(spec: &JacobiSpec, k_max: usize, tol: f64) -> Result<f64> {
    if spec.kind() != SpecKind::Modulated || spec.truncation().is_some() {
        return Err(Error::Precondition("the periodicity check needs an untruncated modulated spec".into()));
    }
    let pair = check_critical(spec.modulation(), tol)?;
    periodicity_residual(spec, pair.gamma(), k_max)
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightStats {
    pub min: f64,
    pub max: f64,
    pub ratio: f64,
}

/// Extremes of `a_n (u_{n-1}^2 + u_n^2) / (u_0^2 + u_1^2)` for `n ∈ [from, to]`,
/// with `u` the orthonormal polynomials at `x`.
pub fn weight_window(spec: &JacobiSpec, x: f64, from: usize, to: usize) -> Result<WeightStats> {
    if from < 1 || to < from {
        return Err(Error::Domain(format!("bad window {from}..={to}")));
    }
    let lat = spec.coefficients(to + 1)?;
    let run = lat.poly_run(x, to);
    let ln0 = run.ln_pair_norm2(1);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for n in from..=to {
        let v = lat.a[n].ln() + run.ln_pair_norm2(n) - ln0;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(WeightStats {
        min: lo.exp(),
        max: hi.exp(),
        ratio: (hi - lo).exp(),
    })
}
