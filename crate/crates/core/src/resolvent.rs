//! Explicit inverses: finite Jacobi sections through orthonormal polynomials, the block
//! inverse of a critically modulated Jacobi matrix, and the boundedness classifier built on it.

use crate::error::{Error, Result};
use crate::lattice::{GrowthLaw, JacobiSpec, KOverA, SpecKind};
use crate::modulator::{check_critical, CriticalPair, DEFAULT_TOL};
use crate::oracle::sturm_count;
use crate::periodic::Modulation;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

/// `D_M(x) = tridiag(α_i, β_i − x, α_i : 0 ≤ i < M)`.
pub fn finite_jacobi(m: &Modulation<f64>, size: usize, x: f64) -> Result<DMatrix<f64>> {
    if size == 0 {
        return Err(Error::Precondition("finite Jacobi section needs size >= 1".into()));
    }
    let mut d = DMatrix::zeros(size, size);
    for i in 0..size {
        d[(i, i)] = m.beta().at(i as i64) - x;
        if i + 1 < size {
            let a = m.alpha().at(i as i64);
            d[(i, i + 1)] = a;
            d[(i + 1, i)] = a;
        }
    }
    Ok(d)
}

/// `D_M(x)⁻¹` assembled entrywise from `w_{j-1}(x)`, `w^{[i]}_{M-i}(x)` and `w_M(x)`.
pub fn inverse_via_polys(m: &Modulation<f64>, size: usize, x: f64) -> Result<DMatrix<f64>> {
    if size == 0 {
        return Err(Error::Precondition("finite Jacobi section needs size >= 1".into()));
    }
    let w = m.ortho_values(0, size, &x);
    let scale = w.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let wm = w[size];
    if !(wm.abs() >= 1e-12 * scale) {
        return Err(Error::Singular(format!(
            "w_{size}({x}) = {wm:e}; x is an eigenvalue of the section to working precision"
        )));
    }
    let mut inv = DMatrix::zeros(size, size);
    for i in 1..=size {
        let tail = m.ortho_values(i as i64, size - i, &x)[size - i];
        let denom = m.alpha().at(i as i64 - 1) * wm;
        for j in 1..=i {
            let v = -w[j - 1] * tail / denom;
            inv[(i - 1, j - 1)] = v;
            inv[(j - 1, i - 1)] = v;
        }
    }
    Ok(inv)
}

/// `‖inverse_via_polys · D_M(x) − Id‖_∞`.
pub fn inverse_residual(m: &Modulation<f64>, size: usize, x: f64) -> Result<f64> {
    let prod = inverse_via_polys(m, size, x)? * finite_jacobi(m, size, x)?;
    Ok((prod - DMatrix::identity(size, size)).amax())
}

/// `F_{i,j} = −w_{i−1}(0) w^{[j]}_{N−j}(0) / (γ α_{j−1})` together with `γ = w_N(0)`.
pub fn f_block(m: &Modulation<f64>) -> Result<(DMatrix<f64>, f64)> {
    let pair = check_critical(m, DEFAULT_TOL)?;
    Ok((f_from_polys(pair.modulation(), pair.gamma()), pair.gamma()))
}

fn f_from_polys(m: &Modulation<f64>, gamma: f64) -> DMatrix<f64> {
    let n = m.period();
    let w = m.ortho_values(0, n, &0.0);
    DMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r + 1, c + 1);
        let wj = m.ortho_values(j as i64, n - j, &0.0)[n - j];
        -w[i - 1] * wj / (gamma * m.alpha().at(j as i64 - 1))
    })
}

/// `F` read off the dense inverse of the `2N` section: `F_{i,j} = [D_{2N}⁻¹(0)]_{i,N+j} / γ`.
pub fn f_from_section(m: &Modulation<f64>, gamma: f64) -> Result<DMatrix<f64>> {
    let n = m.period();
    let inv = finite_jacobi(m, 2 * n, 0.0)?
        .try_inverse()
        .ok_or_else(|| Error::Singular("D_2N(0) is not invertible".into()))?;
    Ok(inv.view((0, n), (n, n)).into_owned() / gamma)
}

/// The four block identities `FE* = 0`, `E*F = 0`, `D_N⁻¹(0)E − FE = 0`,
/// `γFD_N(0) + α_{N−1}FE = 0`, as max-abs residuals in that order.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlockIdentities {
    pub f_e_star: f64,
    pub e_star_f: f64,
    pub dinv_e_minus_f_e: f64,
    pub gamma_f_d_plus_f_e: f64,
}

impl BlockIdentities {
    pub fn max(&self) -> f64 {
        self.f_e_star
            .max(self.e_star_f)
            .max(self.dinv_e_minus_f_e)
            .max(self.gamma_f_d_plus_f_e)
    }
}

/// `max |AB − Id|, |BA − Id|` for a Jacobi section `A` and the matching section `B` of the
/// block inverse, split by whether the entry touches the last block row or column.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SectionProductCheck {
    pub interior: f64,
    pub boundary: f64,
}

/// Block inverse `𝓑` of a critically modulated Jacobi matrix `a_{Nk+i} = α_i ã_k`,
/// `b_{Nk+i} = β_i ã_k`.
#[derive(Clone, Debug)]
pub struct BlockResolvent {
    modulation: Modulation<f64>,
    gamma: f64,
    a_tilde: GrowthLaw,
    dn: DMatrix<f64>,
    dn_inv: DMatrix<f64>,
    f: DMatrix<f64>,
    section_residual: f64,
}

impl BlockResolvent {
    pub fn new(pair: &CriticalPair, a_tilde: GrowthLaw) -> Result<Self> {
        let m = pair.modulation().clone();
        let n = m.period();
        let gamma = pair.gamma();
        let dn = finite_jacobi(&m, n, 0.0)?;
        let dn_inv = inverse_via_polys(&m, n, 0.0)?;
        let f = f_from_polys(&m, gamma);
        let section_residual = (&f - f_from_section(&m, gamma)?).amax();
        Ok(BlockResolvent {
            modulation: m,
            gamma,
            a_tilde,
            dn,
            dn_inv,
            f,
            section_residual,
        })
    }

    /// From an untruncated modulated spec with a critical modulation.
    pub fn from_spec(spec: &JacobiSpec) -> Result<Self> {
        if spec.kind() != SpecKind::Modulated || spec.truncation().is_some() {
            return Err(Error::Precondition(
                "the block inverse needs an untruncated modulated spec".into(),
            ));
        }
        let law = spec
            .a_tilde()
            .ok_or_else(|| Error::Precondition("spec has no growth law".into()))?
            .clone();
        BlockResolvent::new(&check_critical(spec.modulation(), DEFAULT_TOL)?, law)
    }

    pub fn period(&self) -> usize {
        self.modulation.period()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn modulation(&self) -> &Modulation<f64> {
        &self.modulation
    }

    pub fn a_tilde(&self) -> &GrowthLaw {
        &self.a_tilde
    }

    pub fn dn(&self) -> &DMatrix<f64> {
        &self.dn
    }

    pub fn dn_inv(&self) -> &DMatrix<f64> {
        &self.dn_inv
    }

    pub fn f(&self) -> &DMatrix<f64> {
        &self.f
    }

    /// Max-abs difference between `F` from polynomials and from the `2N` section.
    pub fn section_residual(&self) -> f64 {
        self.section_residual
    }

    /// `E_{i,j} = δ_N(i) δ_1(j)`.
    pub fn e(&self) -> DMatrix<f64> {
        let n = self.period();
        let mut e = DMatrix::zeros(n, n);
        e[(n - 1, 0)] = 1.0;
        e
    }

    pub fn block_identities(&self) -> BlockIdentities {
        let e = self.e();
        let et = e.transpose();
        let fe = &self.f * &e;
        let alpha_last = self.modulation.alpha().at(self.period() as i64 - 1);
        BlockIdentities {
            f_e_star: (&self.f * &et).amax(),
            e_star_f: (&et * &self.f).amax(),
            dinv_e_minus_f_e: (&self.dn_inv * &e - &fe).amax(),
            gamma_f_d_plus_f_e: (&self.f * &self.dn * self.gamma + fe * alpha_last).amax(),
        }
    }

    /// `ã_0 .. ã_{count-1}`, all required positive.
    pub fn a_tilde_values(&self, count: usize) -> Result<Vec<f64>> {
        (0..count)
            .map(|k| {
                let v = self.a_tilde.value(k)?;
                if v > 0.0 {
                    Ok(v)
                } else {
                    Err(Error::Domain(format!("ã_{k} = {v} is not positive")))
                }
            })
            .collect()
    }

    /// Dense `(MN)×(MN)` section of `𝓑` made of `blocks` block rows.
    pub fn section(&self, blocks: usize) -> Result<DMatrix<f64>> {
        let n = self.period();
        let at = self.a_tilde_values(blocks)?;
        let ft = self.f.transpose();
        let mut out = DMatrix::zeros(blocks * n, blocks * n);
        for bi in 0..blocks {
            for bj in 0..blocks {
                let block = if bi == bj {
                    &self.dn_inv / at[bi]
                } else if bj > bi {
                    &self.f * (self.gamma.powi((bj - bi) as i32) / at[bj])
                } else {
                    &ft * (self.gamma.powi((bi - bj) as i32) / at[bi])
                };
                out.view_mut((bi * n, bj * n), (n, n)).copy_from(&block);
            }
        }
        Ok(out)
    }

    /// Dense Jacobi section of the matching size, built from the lattice coefficients.
    pub fn jacobi_section(&self, blocks: usize) -> Result<DMatrix<f64>> {
        let (off, diag) = self.jacobi_coefficients(blocks)?;
        let len = diag.len();
        let mut a = DMatrix::zeros(len, len);
        for i in 0..len {
            a[(i, i)] = diag[i];
            if i + 1 < len {
                a[(i, i + 1)] = off[i];
                a[(i + 1, i)] = off[i];
            }
        }
        Ok(a)
    }

    fn jacobi_coefficients(&self, blocks: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let spec = JacobiSpec::modulated(self.modulation.clone(), self.a_tilde.clone());
        let lat = spec.coefficients(blocks * self.period())?;
        Ok((lat.a, lat.b))
    }

    /// `AB` and `BA` against the identity on a section of `blocks` blocks.
    pub fn section_product_check(&self, blocks: usize) -> Result<SectionProductCheck> {
        let n = self.period();
        let a = self.jacobi_section(blocks)?;
        let b = self.section(blocks)?;
        let len = blocks * n;
        let id = DMatrix::<f64>::identity(len, len);
        let ab = &a * &b - &id;
        let ba = &b * &a - id;
        let edge = (blocks - 1) * n;
        let mut check = SectionProductCheck {
            interior: 0.0,
            boundary: 0.0,
        };
        for r in 0..len {
            for c in 0..len {
                let v = ab[(r, c)].abs().max(ba[(r, c)].abs());
                if r >= edge || c >= edge {
                    check.boundary = check.boundary.max(v);
                } else {
                    check.interior = check.interior.max(v);
                }
            }
        }
        Ok(check)
    }

    /// `B_section · x` in `O(M N²)` using running sums over the block rows.
    pub fn apply(&self, at: &[f64], x: &[f64]) -> Vec<f64> {
        let n = self.period();
        let blocks = at.len();
        assert_eq!(x.len(), blocks * n, "vector length must be blocks·N");
        let xb = |k: usize| DVector::from_column_slice(&x[k * n..(k + 1) * n]);
        let ft = self.f.transpose();
        // t_k = Σ_{j>k} γ^{j−k} F x_j / ã_j
        let mut t = vec![DVector::zeros(n); blocks];
        for k in (0..blocks.saturating_sub(1)).rev() {
            t[k] = (&t[k + 1] + &self.f * xb(k + 1) / at[k + 1]) * self.gamma;
        }
        let mut y = Vec::with_capacity(x.len());
        // s_k = Σ_{j<k} γ^{k−j} x_j
        let mut s = DVector::zeros(n);
        for k in 0..blocks {
            let xk = xb(k);
            let yk = (&self.dn_inv * &xk + &ft * &s) / at[k] + &t[k];
            y.extend(yk.iter());
            s = (s + xk) * self.gamma;
        }
        y
    }

    /// `‖B_section‖` by power iteration, stopping when the estimate changes by less than `rel_tol`.
    pub fn norm_power(&self, blocks: usize, rel_tol: f64, max_iter: usize) -> Result<f64> {
        let at = self.a_tilde_values(blocks)?;
        let len = blocks * self.period();
        // deterministic start with no special symmetry
        let mut v: Vec<f64> = (0..len).map(|k| 1.0 + 0.5 * ((k as f64) * 0.7).sin()).collect();
        normalize(&mut v);
        let mut est = 0.0;
        for _ in 0..max_iter {
            let mut w = self.apply(&at, &v);
            let next = normalize(&mut w);
            if (next - est).abs() <= rel_tol * next {
                return Ok(next);
            }
            est = next;
            v = w;
        }
        Err(Error::no_convergence(format!(
            "power iteration for the {blocks}-block section did not settle in {max_iter} steps (last {est:e})"
        )))
    }

    /// Number of singular values of the section above `tau`. The section of `𝓑` is the exact
    /// inverse of the Jacobi section (the first column of `F` vanishes, so truncation leaves no
    /// defect), which turns this into a Sturm count of the Jacobi section on `(−1/τ, 1/τ)`.
    pub fn sv_count(&self, blocks: usize, tau: f64) -> Result<usize> {
        let (off, diag) = self.jacobi_coefficients(blocks)?;
        let len = diag.len();
        let r = 1.0 / tau;
        Ok(sturm_count(&off, &diag, len, r) - sturm_count(&off, &diag, len, -r))
    }

    /// `‖B x^M‖ / ‖x^M‖` for `x^M_n = (−γⁿ(M−n)⁺, 0, …, 0)` against
    /// `M / (2 α_{N−1} max_{k≤M} ã_k)`.
    pub fn witness(&self, blocks: usize) -> Result<Witness> {
        let n = self.period();
        let at = self.a_tilde_values(blocks + 1)?;
        let mut x = vec![0.0; blocks * n];
        for k in 0..blocks {
            x[k * n] = -self.gamma.powi(k as i32) * (blocks - k) as f64;
        }
        let y = self.apply(&at[..blocks], &x);
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let max_a = at.iter().fold(0.0f64, |m, v| m.max(*v));
        let alpha_last = self.modulation.alpha().at(n as i64 - 1);
        Ok(Witness {
            ratio: norm(&y) / norm(&x),
            bound: blocks as f64 / (2.0 * alpha_last * max_a),
        })
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|a| *a /= n);
    }
    n
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Witness {
    pub ratio: f64,
    pub bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseVerdict {
    Unbounded,
    Bounded,
    Compact,
}

impl From<KOverA> for PhaseVerdict {
    fn from(k: KOverA) -> Self {
        match k {
            KOverA::Infinite => PhaseVerdict::Unbounded,
            KOverA::Bounded => PhaseVerdict::Bounded,
            KOverA::Zero => PhaseVerdict::Compact,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderPoint {
    #[serde(rename = "M")]
    pub blocks: usize,
    pub norm: f64,
    pub sv_count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseEvidence {
    pub verdict: PhaseVerdict,
    pub ladder: Vec<LadderPoint>,
    /// `"k_over_a"` for named growth laws, `"numeric"` when only the ladder decides.
    pub criterion: &'static str,
    pub numeric_verdict: PhaseVerdict,
}

pub const DEFAULT_LADDER: [usize; 5] = [64, 128, 256, 512, 1024];
pub const DEFAULT_TAU: f64 = 1e-3;

/// Boundedness of `𝓑` from the growth law, backed by section norms and singular-value counts.
///
/// Numerically, norms growing by 2× over the ladder read as unbounded; otherwise an unchanged
/// count over the last two sizes reads as compact, anything else as bounded.
pub fn phase_classify(res: &BlockResolvent, ladder: &[usize], tau: f64) -> Result<PhaseEvidence> {
    if ladder.len() < 2 {
        return Err(Error::Precondition("the ladder needs at least two sizes".into()));
    }
    let points = ladder
        .par_iter()
        .map(|&m| {
            Ok(LadderPoint {
                blocks: m,
                norm: res.norm_power(m, 1e-6, 200_000)?,
                sv_count: res.sv_count(m, tau)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let first = &points[0];
    let last = &points[points.len() - 1];
    let numeric_verdict = if last.norm >= 2.0 * first.norm {
        PhaseVerdict::Unbounded
    } else if points[points.len() - 2].sv_count == last.sv_count {
        PhaseVerdict::Compact
    } else {
        PhaseVerdict::Bounded
    };
    let analytic = res.a_tilde().k_over_a().map(PhaseVerdict::from);
    Ok(PhaseEvidence {
        verdict: analytic.unwrap_or(numeric_verdict),
        ladder: points,
        criterion: if analytic.is_some() { "k_over_a" } else { "numeric" },
        numeric_verdict,
    })
}

/// Norm of the `n×n` averaging section `(Hx)_k = (1/k) Σ_{j<k} x_j`, `k = 1..n`,
/// by power iteration on `HᵀH`; a lower estimate of the true norm.
pub fn hardy_section_norm(n: usize) -> f64 {
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut acc = 0.0;
        (0..n)
            .map(|k| {
                acc += x[k];
                acc / (k + 1) as f64
            })
            .collect()
    };
    let apply_t = |y: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        let mut acc = 0.0;
        for j in (0..n).rev() {
            acc += y[j] / (j + 1) as f64;
            out[j] = acc;
        }
        out
    };
    let mut v = vec![1.0; n];
    normalize(&mut v);
    let mut est = 0.0;
    for _ in 0..100_000 {
        let mut w = apply_t(&apply(&v));
        let next = normalize(&mut w).sqrt();
        v = w;
        if (next - est).abs() <= 1e-12 * next {
            return next;
        }
        est = next;
    }
    est
}
