//! N-shifted Turán determinants and the density of the spectral measure on Λ.

use crate::error::{Error, Result};
use crate::format::csv_float;
use crate::lattice::{ldexp, EigvecRun, JacobiSpec, Lattice};
use crate::mat2::Mat2;
use crate::modulator::{c_limit_matrix, check_critical, compute_h, CriticalPair, GapInterval, HPolynomial, DEFAULT_TOL};
use crate::periodic::PeriodicSeq;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// `C_n(λ) = a_{n+N-1}(X_n(λ) - γ Id)`.
pub fn c_matrix(lat: &Lattice, n: usize, lambda: f64, gamma: f64) -> Mat2<f64> {
    let a = lat.a[n + lat.period - 1];
    (lat.window_matrix(n, lambda) - Mat2::diag(gamma)).scale(&a)
}

/// `S_n` evaluated two ways.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TuranValue {
    /// `a_{n+N-1}^2 (u_{n+N-1} u_n - u_{n+N} u_{n-1})`
    pub det_form: f64,
    /// `(a_{n+N-1}^2 / a_{n-1}) ⟨E C_n v, v⟩`, `v = (u_{n+N-1}, u_{n+N})`, `E = [[0,-1],[1,0]]`
    pub quad_form: f64,
}

impl TuranValue {
    pub fn rel_diff(&self) -> f64 {
        (self.det_form - self.quad_form).abs() / self.det_form.abs().max(self.quad_form.abs())
    }
}

/// Turán value at `n ≥ 1` for the generalised eigenvector `run` (needs `u_{n+N}`).
pub fn turan_s(lat: &Lattice, run: &EigvecRun, n: usize, gamma: f64) -> TuranValue {
    let big_n = lat.period;
    let e = run.scaled(n + big_n).1;
    let u = |k: usize| run.rel(k, e);
    let a = lat.a[n + big_n - 1];
    let det = a * a * (u(n + big_n - 1) * u(n) - u(n + big_n) * u(n - 1));
    let v = [u(n + big_n - 1), u(n + big_n)];
    let w = c_matrix(lat, n, run.x, gamma).apply(v);
    let quad = a * a / lat.a[n - 1] * (w[0] * v[1] - w[1] * v[0]);
    TuranValue {
        det_form: ldexp(det, 2 * e),
        quad_form: ldexp(quad, 2 * e),
    }
}

/// Stopping rule for the Turán series.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SeriesOpts {
    pub rel_tol: f64,
    pub k_max: usize,
    /// Terms with `k` below this are never tested.
    pub burn_in: usize,
    /// Consecutive small changes required.
    pub confirm: usize,
}

impl Default for SeriesOpts {
    fn default() -> Self {
        SeriesOpts {
            rel_tol: 1e-6,
            k_max: 5000,
            burn_in: 10,
            confirm: 3,
        }
    }
}

/// `S_{kN+i}(x)` for `k = 1, 2, …` up to convergence.
#[derive(Clone, Debug, Serialize)]
pub struct TuranSeries {
    pub i: usize,
    pub x: f64,
    /// `terms[j] = S_{(j+1)N+i}(x)`
    pub terms: Vec<f64>,
    pub converged: bool,
    pub limit: f64,
    /// Power-law extrapolation of the remaining change, infinite when the fit does not decay.
    pub tail_bound: f64,
    pub last_rel_change: f64,
    /// Largest relative disagreement between the two forms of `S_n`.
    pub two_path_residual: f64,
    /// Sign changes among terms past the burn-in.
    pub sign_changes: usize,
}

impl TuranSeries {
    pub fn iterations(&self) -> usize {
        self.terms.len()
    }
}

/// Lattice length needed by [`turan_series`].
pub fn series_len(period: usize, i: usize, k_max: usize) -> usize {
    (k_max + 2) * period + i + 1
}

/// Runs the Turán series on a precomputed lattice. Never fails; check `converged`.
pub fn turan_series(lat: &Lattice, gamma: f64, i: usize, x: f64, opts: &SeriesOpts) -> TuranSeries {
    let big_n = lat.period;
    let run = lat.poly_run(x, series_len(big_n, i, opts.k_max) - 1);
    let mut terms = Vec::new();
    let mut streak = 0;
    let mut last_rel_change = f64::INFINITY;
    let mut two_path_residual: f64 = 0.0;
    let mut converged = false;
    for k in 1..=opts.k_max {
        let v = turan_s(lat, &run, k * big_n + i, gamma);
        two_path_residual = two_path_residual.max(v.rel_diff());
        let s = v.det_form;
        if let Some(prev) = terms.last().copied() {
            let prev: f64 = prev;
            last_rel_change = (s - prev).abs() / prev.abs();
            if k >= opts.burn_in && last_rel_change < opts.rel_tol {
                streak += 1;
            } else {
                streak = 0;
            }
        }
        terms.push(s);
        if streak >= opts.confirm {
            converged = true;
            break;
        }
    }
    let burn = opts.burn_in.min(terms.len());
    let sign_changes = terms[burn..].windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    let limit = terms.last().copied().unwrap_or(f64::NAN).abs();
    TuranSeries {
        i,
        x,
        tail_bound: tail_bound(&terms),
        terms,
        converged,
        limit,
        last_rel_change,
        two_path_residual,
        sign_changes,
    }
}

/// Fits `|S_k - S_{k-1}| ≈ c k^{-p}` on the last terms and sums the fitted tail.
fn tail_bound(terms: &[f64]) -> f64 {
    let k = terms.len();
    if k < 8 {
        return f64::INFINITY;
    }
    let d = |j: usize| (terms[j] - terms[j - 1]).abs();
    let (k1, k2) = (k / 2, k - 1);
    let (d1, d2) = (d(k1), d(k2));
    if d2 == 0.0 {
        return 0.0;
    }
    if d1 == 0.0 {
        return f64::INFINITY;
    }
    let p = (d1 / d2).ln() / ((k2 + 1) as f64 / (k1 + 1) as f64).ln();
    if p <= 1.0 {
        return f64::INFINITY;
    }
    d2 * (k2 + 1) as f64 / (p - 1.0)
}

/// Behaviour of `|a_{n+N} - a_n|` along a ladder of indices.
#[derive(Clone, Debug, Serialize)]
pub struct IncrementMonitor {
    /// `(n, max_{0≤j<N} |a_{n+j+N} - a_{n+j}|)`
    pub checkpoints: Vec<(usize, f64)>,
    /// Strictly decreasing and below `1e-3` at the last checkpoint.
    pub satisfied: bool,
}

pub fn monitor_increments(spec: &JacobiSpec, checkpoints: &[usize]) -> Result<IncrementMonitor> {
    let big_n = spec.period();
    let mut out = Vec::with_capacity(checkpoints.len());
    for &n in checkpoints {
        let mut worst: f64 = 0.0;
        for j in 0..big_n {
            let (a0, _) = spec.generate(n + j)?;
            let (a1, _) = spec.generate(n + j + big_n)?;
            worst = worst.max((a1 - a0).abs());
        }
        out.push((n, worst));
    }
    let satisfied = out.windows(2).all(|w| w[1].1 < w[0].1) && out.last().is_some_and(|p| p.1 < 1e-3);
    Ok(IncrementMonitor {
        checkpoints: out,
        satisfied,
    })
}

pub const DEFAULT_MONITOR: [usize; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];

/// One nondegeneracy sample.
#[derive(Clone, Debug, Serialize)]
pub struct NondegPoint {
    pub lambda: f64,
    /// `discr 𝓒_i(λ)` for `i = 0..N`.
    pub discr: Vec<f64>,
    /// `discr 𝓒_i(λ) (r_0⋯r_{i-1})^2`, which should not depend on `i`.
    pub scaled: Vec<f64>,
    pub in_lambda: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NondegScan {
    pub points: Vec<NondegPoint>,
    /// Every point of Λ has negative discriminants and every point off Λ nonnegative ones.
    pub consistent: bool,
    /// Largest spread of the scaled discriminants, relative to their size.
    pub scaling_residual: f64,
}

pub fn nondegeneracy_scan(pair: &CriticalPair, s: &PeriodicSeq<f64>, z: &PeriodicSeq<f64>, grid: &[f64]) -> Result<NondegScan> {
    let n = pair.period();
    let h = compute_h(pair, s, z, 0)?;
    let limits = (0..n as i64).map(|i| c_limit_matrix(pair, s, z, i)).collect::<Result<Vec<_>>>()?;
    let alpha = pair.modulation().alpha();
    let mut r_prod = vec![1.0; n];
    for i in 1..n {
        // r_j = α_{j-1}/α_j, product over j < i
        let j = i as i64 - 1;
        r_prod[i] = r_prod[i - 1] * alpha.at(j - 1) / alpha.at(j);
    }
    let mut consistent = true;
    let mut scaling_residual: f64 = 0.0;
    let points = grid
        .iter()
        .map(|&lambda| {
            let discr: Vec<f64> = limits.iter().map(|c| c.eval(lambda).discr()).collect();
            let scaled: Vec<f64> = discr.iter().zip(&r_prod).map(|(d, r)| d * r * r).collect();
            let in_lambda = h.in_lambda(lambda);
            let ok = if in_lambda {
                discr.iter().all(|d| *d < 0.0)
            } else {
                discr.iter().all(|d| *d >= -1e-12 * (1.0 + lambda * lambda))
            };
            consistent &= ok;
            let big = scaled.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            let spread = scaled.iter().fold(0.0f64, |m, v| m.max((v - scaled[0]).abs()));
            scaling_residual = scaling_residual.max(spread / big);
            NondegPoint {
                lambda,
                discr,
                scaled,
                in_lambda,
            }
        })
        .collect();
    Ok(NondegScan {
        points,
        consistent,
        scaling_residual,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DensityOpts {
    pub series: SeriesOpts,
    /// Half-width of the excluded band around `∂Λ`; `None` picks the default.
    pub collar: Option<f64>,
}

impl Default for DensityOpts {
    /// Tighter than the bare series default: the per-step change can dip below `1e-6` at a
    /// turning point of a slowly decaying oscillation long before `S` has settled.
    fn default() -> Self {
        DensityOpts {
            series: SeriesOpts {
                rel_tol: 1e-8,
                k_max: 50_000,
                ..SeriesOpts::default()
            },
            collar: None,
        }
    }
}

/// Default collar: 5% of the gap width, or 0.05 for a one-point gap.
pub fn default_collar(gap: &GapInterval) -> f64 {
    match gap {
        GapInterval::Interval { .. } => 0.05 * gap.width(),
        GapInterval::Point { .. } => 0.05,
        GapInterval::Empty => 0.0,
    }
}

/// Everything needed to evaluate the density of one spec from residue `i`.
#[derive(Clone, Debug)]
pub struct TuranContext {
    pub pair: CriticalPair,
    pub h: HPolynomial,
    pub i: usize,
    pub collar: f64,
    pub opts: SeriesOpts,
    pub monitor: IncrementMonitor,
    lattice: Lattice,
}

impl TuranContext {
    pub fn new(spec: &JacobiSpec, i: usize, opts: &DensityOpts) -> Result<Self> {
        let big_n = spec.period();
        if i >= big_n {
            return Err(Error::Domain(format!("residue {i} out of range for period {big_n}")));
        }
        let pair = check_critical(spec.modulation(), DEFAULT_TOL)?;
        let limits = spec.perturbation_limits()?;
        let h = compute_h(&pair, &limits.s, &limits.z, i as i64)?;
        let collar = opts.collar.unwrap_or_else(|| default_collar(&h.interval));
        let lattice = spec.coefficients(series_len(big_n, i, opts.series.k_max) + 1)?;
        let monitor = monitor_increments(spec, &DEFAULT_MONITOR)?;
        Ok(TuranContext {
            pair,
            h,
            i,
            collar,
            opts: opts.series,
            monitor,
            lattice,
        })
    }

    /// Inside Λ and outside the collar.
    pub fn admissible(&self, x: f64) -> bool {
        self.h.in_lambda(x) && self.h.interval.distance(x) > self.collar
    }

    /// Series with no Λ check.
    pub fn series(&self, x: f64) -> TuranSeries {
        turan_series(&self.lattice, self.pair.gamma(), self.i, x, &self.opts)
    }

    /// `g̃^i(x)`.
    pub fn gtilde(&self, x: f64) -> Result<(f64, TuranSeries)> {
        if !self.admissible(x) {
            return Err(Error::Domain(format!("x = {x} is not in Λ outside the collar {}", self.collar)));
        }
        let series = self.series(x);
        if !series.converged {
            return Err(Error::NoConvergence {
                message: format!(
                    "Turán series at x = {x} did not settle within k = {} (last relative change {:.3e})",
                    self.opts.k_max, series.last_rel_change
                ),
                series: Some(Box::new(series)),
            });
        }
        Ok((series.limit, series))
    }

    /// `√h_i(x) / (2π g̃)`.
    pub fn density_from(&self, x: f64, g: f64) -> f64 {
        self.h.h.eval(&x).max(0.0).sqrt() / (2.0 * PI * g)
    }

    fn point(&self, x: f64) -> DensityPoint {
        let s = self.series(x);
        DensityPoint {
            x,
            density: self.density_from(x, s.limit),
            h: self.h.h.eval(&x),
            gtilde: s.limit,
            iterations: s.iterations(),
            converged: s.converged,
            last_rel_change: s.last_rel_change,
        }
    }

    pub fn density(&self, grid: &[f64]) -> Result<DensityProfile> {
        if let Some(x) = grid.iter().find(|x| !self.admissible(**x)) {
            return Err(Error::Domain(format!(
                "grid point {x} is outside Λ or within the collar {} of its boundary",
                self.collar
            )));
        }
        Ok(self.profile(grid))
    }

    /// Like [`Self::density`] but only requires `h_0 ≥ 0`, so collar points are evaluated too.
    pub fn density_to_edge(&self, grid: &[f64]) -> Result<DensityProfile> {
        if let Some(x) = grid.iter().find(|x| self.h.h0.eval(x) < 0.0) {
            return Err(Error::Domain(format!("grid point {x} is outside the closure of Λ")));
        }
        Ok(self.profile(grid))
    }

    fn profile(&self, grid: &[f64]) -> DensityProfile {
        let points = grid.par_iter().map(|&x| self.point(x)).collect();
        DensityProfile {
            i: self.i,
            collar: self.collar,
            gap: self.h.interval,
            h: self.h.h.clone(),
            points,
            monitor: self.monitor.clone(),
        }
    }

    /// `∫ μ'` over Λ by adaptive Simpson on log-spaced panels, split into the part outside
    /// the collar, the collar itself, and an extrapolated tail beyond `±X`.
    pub fn normalization(&self, tol: f64) -> Result<Normalization> {
        let mut report = Normalization {
            total: 0.0,
            outside_collar: 0.0,
            bulk: 0.0,
            collar: 0.0,
            tail: 0.0,
            x_max: 0.0,
            evaluations: 0,
            unconverged: 0,
        };
        let f = |x: f64, rep: &mut Normalization| {
            let s = self.series(x);
            rep.evaluations += 1;
            if !s.converged {
                rep.unconverged += 1;
            }
            self.density_from(x, s.limit)
        };
        // each Λ component as (edge, direction)
        let edges: Vec<(f64, f64)> = match self.h.interval {
            GapInterval::Empty => {
                return Err(Error::Precondition("Λ is the whole line; no edge to anchor the integration".into()))
            }
            GapInterval::Point { at } => vec![(at, -1.0), (at, 1.0)],
            GapInterval::Interval { lo, hi } => vec![(lo, -1.0), (hi, 1.0)],
        };
        let mut x_max: f64 = 0.0;
        for (edge, dir) in edges {
            let start = edge + dir * self.collar;
            // inside the collar the series is evaluated directly; it is reported separately
            let (lo, hi) = if dir > 0.0 { (edge, start) } else { (start, edge) };
            let mut fc = |x: f64| {
                let s = self.series(x);
                report.evaluations += 1;
                if !s.converged {
                    report.unconverged += 1;
                }
                self.density_from(x, s.limit)
            };
            let collar_mass = adaptive_simpson(&mut fc, lo, hi, tol * 1e-2, 30);
            report.collar += collar_mass;
            // log-spaced panels out to X, doubling until the tail is small
            let mut width = self.collar.max(1e-3);
            let mut pos = start;
            let mut fx_prev = f(pos, &mut report);
            loop {
                let next = pos + dir * width;
                let mut g = |x: f64| {
                    let s = self.series(x);
                    report.evaluations += 1;
                    if !s.converged {
                        report.unconverged += 1;
                    }
                    self.density_from(x, s.limit)
                };
                let piece = adaptive_simpson(&mut g, pos.min(next), pos.max(next), tol, 20);
                report.bulk += piece;
                let fx = f(next, &mut report);
                pos = next;
                let dist = (pos - edge).abs();
                if dist >= 4.0 {
                    let tail = tail_mass(fx_prev, fx, width, dist);
                    if tail < tol || dist > 256.0 {
                        report.tail += tail;
                        x_max = x_max.max(pos.abs());
                        break;
                    }
                }
                fx_prev = fx;
                width = (2.0 * width).min(1.0);
            }
        }
        report.x_max = x_max;
        report.outside_collar = report.bulk + report.tail;
        report.total = report.outside_collar + report.collar;
        Ok(report)
    }
}

/// Tail mass beyond a point at distance `d` from the edge, from two density samples `step`
/// apart. The larger of an exponential and a power-law fit.
fn tail_mass(f_prev: f64, f: f64, step: f64, d: f64) -> f64 {
    if f <= 0.0 {
        return 0.0;
    }
    if f_prev <= f {
        return f64::INFINITY;
    }
    let kappa = (f_prev / f).ln() / step;
    let exp_tail = f / kappa;
    let q = (f_prev / f).ln() / (d / (d - step)).ln();
    let pow_tail = if q > 1.0 { f * d / (q - 1.0) } else { f64::INFINITY };
    exp_tail.max(pow_tail)
}

fn adaptive_simpson(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

#[derive(Clone, Debug, Serialize)]
pub struct Normalization {
    /// `bulk + collar + tail`
    pub total: f64,
    /// `bulk + tail`
    pub outside_collar: f64,
    pub bulk: f64,
    pub collar: f64,
    pub tail: f64,
    pub x_max: f64,
    pub evaluations: usize,
    pub unconverged: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityPoint {
    pub x: f64,
    pub density: f64,
    pub h: f64,
    pub gtilde: f64,
    pub iterations: usize,
    pub converged: bool,
    pub last_rel_change: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityProfile {
    pub i: usize,
    pub collar: f64,
    pub gap: GapInterval,
    pub h: crate::poly::Poly<f64>,
    pub points: Vec<DensityPoint>,
    pub monitor: IncrementMonitor,
}

impl DensityProfile {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.density).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,density,h,gtilde,iterations,converged\n");
        for p in &self.points {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                csv_float(p.x),
                csv_float(p.density),
                csv_float(p.h),
                csv_float(p.gtilde),
                p.iterations,
                p.converged
            ));
        }
        s
    }
}

/// Density profile on `grid` from residue `i`.
pub fn density(spec: &JacobiSpec, i: usize, grid: &[f64], opts: &DensityOpts) -> Result<DensityProfile> {
    TuranContext::new(spec, i, opts)?.density(grid)
}

/// `g̃^i(x)` with its series.
pub fn gtilde(spec: &JacobiSpec, i: usize, x: f64, opts: &DensityOpts) -> Result<(f64, TuranSeries)> {
    TuranContext::new(spec, i, opts)?.gtilde(x)
}
