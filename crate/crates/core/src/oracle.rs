//! Reference spectral data for finite Jacobi sections: eigenvalues, first-component
//! weights, Sturm counts and CDF comparisons.

use crate::error::{Error, Result};
use crate::format::csv_float;
use crate::lattice::JacobiSpec;
use crate::turan::DensityProfile;
use rayon::prelude::*;
use serde::Serialize;

/// Nodes and weights of the spectral measure of an `M×M` section.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralMeasureApprox {
    pub size: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectralMeasureApprox {
    /// `Σ w_j λ_j^k`.
    pub fn moment(&self, k: u32) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * x.powi(k as i32)).sum()
    }

    /// Mass of nodes in `[lo, hi]`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .filter(|(x, _)| **x >= lo && **x <= hi)
            .map(|(_, w)| w)
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("node,weight\n");
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s.push_str(&csv_float(*x));
            s.push(',');
            s.push_str(&csv_float(*w));
            s.push('\n');
        }
        s
    }
}

/// Eigenvalues of the `m×m` section with off-diagonal `a` and diagonal `b`, and the squared
/// first components of the normalised eigenvectors. Implicit-shift QL.
pub fn tridiag_eigs(a: &[f64], b: &[f64], m: usize) -> Result<SpectralMeasureApprox> {
    if m == 0 || b.len() < m || a.len() + 1 < m {
        return Err(Error::Domain(format!("section of size {m} needs {m} diagonal and {} off-diagonal entries", m.saturating_sub(1))));
    }
    if let Some(i) = a[..m - 1].iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Domain(format!("a_{i} = {} is not positive", a[i])));
    }
    let mut d = b[..m].to_vec();
    let mut e: Vec<f64> = a[..m - 1].to_vec();
    e.push(0.0);
    let mut z = vec![0.0; m];
    z[0] = 1.0;

    for l in 0..m {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm + 1 < m {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::no_convergence(format!("QL iteration stalled at eigenvalue index {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = mm;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let bb = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * bb;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - bb;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    Ok(SpectralMeasureApprox {
        size: m,
        nodes: idx.iter().map(|&i| d[i]).collect(),
        weights: idx.iter().map(|&i| z[i] * z[i]).collect(),
    })
}

/// Number of eigenvalues of the `m×m` section strictly below `x`.
pub fn sturm_count(a: &[f64], b: &[f64], m: usize, x: f64) -> usize {
    let mut count = 0;
    let mut q = b[0] - x;
    for i in 0..m {
        if i > 0 {
            q = (b[i] - x) - a[i - 1] * a[i - 1] / q;
        }
        if q == 0.0 {
            q = -f64::EPSILON * (a.get(i).copied().unwrap_or(1.0).abs() + b[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues of the section lying in `[lo, hi)`, by bisection on Sturm counts.
pub fn eigenvalues_in(a: &[f64], b: &[f64], m: usize, lo: f64, hi: f64) -> Vec<f64> {
    let c_lo = sturm_count(a, b, m, lo);
    let c_hi = sturm_count(a, b, m, hi);
    (c_lo..c_hi)
        .map(|k| {
            // smallest x with more than k eigenvalues below it
            let (mut l, mut h) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (l + h);
                if mid <= l || mid >= h {
                    break;
                }
                if sturm_count(a, b, m, mid) > k {
                    h = mid;
                } else {
                    l = mid;
                }
            }
            0.5 * (l + h)
        })
        .collect()
}

/// Spectral measure of the section of size `m` of the lattice truncated at block `k`.
pub fn truncated_measure(spec: &JacobiSpec, k: usize, m: usize) -> Result<SpectralMeasureApprox> {
    let lat = spec.truncated(k).coefficients(m)?;
    tridiag_eigs(&lat.a, &lat.b, m)
}

/// Spectral measure of the section of size `m` of `spec`.
pub fn section_measure(spec: &JacobiSpec, m: usize) -> Result<SpectralMeasureApprox> {
    let lat = spec.coefficients(m)?;
    tridiag_eigs(&lat.a, &lat.b, m)
}

#[derive(Clone, Debug, Serialize)]
pub struct GapProbePoint {
    pub m: usize,
    pub count: usize,
    /// Smallest distance between consecutive eigenvalues in the window.
    pub min_spacing: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeSignal {
    /// Counts increase strictly over the last three ladder points.
    Growing,
    /// The last two counts agree.
    Stable,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapProbe {
    pub lo: f64,
    pub hi: f64,
    pub points: Vec<GapProbePoint>,
    pub signal: ProbeSignal,
}

/// Eigenvalue counts of sections in `(lo, hi)` along a ladder of sizes.
pub fn window_probe(spec: &JacobiSpec, lo: f64, hi: f64, ladder: &[usize]) -> Result<GapProbe> {
    let m_max = ladder.iter().copied().max().unwrap_or(0);
    let lat = spec.coefficients(m_max)?;
    let points: Vec<GapProbePoint> = ladder
        .par_iter()
        .map(|&m| {
            let ev = eigenvalues_in(&lat.a, &lat.b, m, lo, hi);
            let min_spacing = ev.windows(2).map(|w| w[1] - w[0]).reduce(f64::min);
            GapProbePoint {
                m,
                count: ev.len(),
                min_spacing,
            }
        })
        .collect();
    let counts: Vec<usize> = points.iter().map(|p| p.count).collect();
    let tail = &counts[counts.len().saturating_sub(3)..];
    let signal = if tail.len() == 3 && tail.windows(2).all(|w| w[1] > w[0]) {
        ProbeSignal::Growing
    } else if counts.len() >= 2 && counts[counts.len() - 1] == counts[counts.len() - 2] {
        ProbeSignal::Stable
    } else {
        ProbeSignal::Inconclusive
    };
    Ok(GapProbe { lo, hi, points, signal })
}

/// Counts in `(-delta, delta)`.
pub fn gap_probe(spec: &JacobiSpec, delta: f64, ladder: &[usize]) -> Result<GapProbe> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta = {delta} must be positive")));
    }
    window_probe(spec, -delta, delta, ladder)
}

#[derive(Clone, Debug, Serialize)]
pub struct CdfComparison {
    pub sup_gap: f64,
    /// Same comparison without renormalising either side to the window.
    pub sup_gap_unnormalised: f64,
    /// Mass of the density over the window.
    pub density_mass: f64,
    /// Mass of the discrete measure over the window.
    pub empirical_mass: f64,
    pub nodes_in_window: usize,
}

/// Sup distance between the window-normalised CDFs of a sampled density and a discrete measure.
///
/// The density is integrated by the trapezoid rule on `xs` (which must cover `[lo, hi]`).
/// Comparison points are the nodes in the window, where the discrete CDF takes the middle
/// of its jump; a Gauss-type quadrature brackets the true CDF there by the jump.
pub fn cdf_compare_curve(
    xs: &[f64],
    density: &[f64],
    approx: &SpectralMeasureApprox,
    lo: f64,
    hi: f64,
) -> Result<CdfComparison> {
    let empty = CdfComparison {
        sup_gap: 0.0,
        sup_gap_unnormalised: 0.0,
        density_mass: 0.0,
        empirical_mass: 0.0,
        nodes_in_window: 0,
    };
    if hi <= lo {
        return Ok(empty);
    }
    if xs.len() < 2 || xs.len() != density.len() || xs[0] > lo || xs[xs.len() - 1] < hi {
        return Err(Error::Domain(format!("density grid must cover [{lo}, {hi}]")));
    }
    let mut cum = vec![0.0; xs.len()];
    for j in 1..xs.len() {
        cum[j] = cum[j - 1] + 0.5 * (density[j] + density[j - 1]) * (xs[j] - xs[j - 1]);
    }
    let interp = |x: f64| {
        let j = xs.partition_point(|v| *v <= x).clamp(1, xs.len() - 1);
        let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
        cum[j - 1] + t * (cum[j] - cum[j - 1])
    };
    let c_lo = interp(lo);
    let density_mass = interp(hi) - c_lo;

    let inside: Vec<(f64, f64)> = approx
        .nodes
        .iter()
        .zip(&approx.weights)
        .filter(|(x, _)| **x > lo && **x < hi)
        .map(|(x, w)| (*x, *w))
        .collect();
    let empirical_mass: f64 = inside.iter().map(|p| p.1).sum();
    if inside.is_empty() || density_mass <= 0.0 || empirical_mass <= 0.0 {
        return Err(Error::Domain(format!("window [{lo}, {hi}] carries no mass")));
    }
    let mut sup_gap: f64 = 0.0;
    let mut sup_gap_unnormalised: f64 = 0.0;
    let mut before = 0.0;
    for (x, w) in &inside {
        let f_emp = before + 0.5 * w;
        let f_dens = interp(*x) - c_lo;
        sup_gap = sup_gap.max((f_dens / density_mass - f_emp / empirical_mass).abs());
        sup_gap_unnormalised = sup_gap_unnormalised.max((f_dens - f_emp).abs());
        before += w;
    }
    Ok(CdfComparison {
        sup_gap,
        sup_gap_unnormalised,
        density_mass,
        empirical_mass,
        nodes_in_window: inside.len(),
    })
}

/// [`cdf_compare_curve`] for a density profile; the profile grid must cover `[lo, hi]`.
pub fn cdf_compare(profile: &DensityProfile, approx: &SpectralMeasureApprox, lo: f64, hi: f64) -> Result<CdfComparison> {
    if hi <= lo {
        return cdf_compare_curve(&[], &[], approx, lo, hi);
    }
    if profile.points.is_empty() {
        return Err(Error::Domain("empty density profile".into()));
    }
    cdf_compare_curve(&profile.grid(), &profile.values(), approx, lo, hi)
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureDistance {
    /// `sup |F_1 - F_2|` over `[lo, hi]`.
    pub sup_gap: f64,
    /// Mean of `|F_1 - F_2|` over `[lo, hi]`.
    pub mean_gap: f64,
}

/// Distance between the CDFs of two discrete measures on `[lo, hi]`, computed exactly on
/// the merged node set.
pub fn cdf_distance(p: &SpectralMeasureApprox, q: &SpectralMeasureApprox, lo: f64, hi: f64) -> MeasureDistance {
    if hi <= lo {
        return MeasureDistance {
            sup_gap: 0.0,
            mean_gap: 0.0,
        };
    }
    let mut pts: Vec<f64> = p
        .nodes
        .iter()
        .chain(&q.nodes)
        .copied()
        .filter(|x| *x > lo && *x < hi)
        .chain([lo, hi])
        .collect();
    pts.sort_by(f64::total_cmp);
    // running CDFs F(x-) swept over the merged nodes
    let below = |s: &SpectralMeasureApprox, x: f64| -> f64 {
        let j = s.nodes.partition_point(|v| *v < x);
        s.weights[..j].iter().sum()
    };
    let (mut fp, mut fq) = (below(p, lo), below(q, lo));
    let (mut ip, mut iq) = (p.nodes.partition_point(|v| *v < lo), q.nodes.partition_point(|v| *v < lo));
    let mut sup_gap: f64 = 0.0;
    let mut integral = 0.0;
    for w in pts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        while ip < p.nodes.len() && p.nodes[ip] < mid {
            fp += p.weights[ip];
            ip += 1;
        }
        while iq < q.nodes.len() && q.nodes[iq] < mid {
            fq += q.weights[iq];
            iq += 1;
        }
        let d = (fp - fq).abs();
        sup_gap = sup_gap.max(d);
        integral += d * (w[1] - w[0]);
    }
    MeasureDistance {
        sup_gap,
        mean_gap: integral / (hi - lo),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GrowthLaw;
    use crate::modulator::{double_period, DEFAULT_TOL};
    use crate::periodic::Modulation;
    use crate::roots::real_roots;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference() -> JacobiSpec {
        JacobiSpec::modulated(
            Modulation::from_vecs(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap(),
            GrowthLaw::Linear { slope: 1.0, intercept: 1.0 },
        )
    }

    #[test]
    fn single_node() {
        let s = tridiag_eigs(&[], &[0.7], 1).unwrap();
        assert_eq!(s.nodes, vec![0.7]);
        assert_eq!(s.weights, vec![1.0]);
    }

    #[test]
    fn chebyshev_section() {
        for m in [2usize, 5, 17, 100] {
            let s = tridiag_eigs(&vec![1.0; m - 1], &vec![0.0; m], m).unwrap();
            for (j, x) in s.nodes.iter().enumerate() {
                let want = 2.0 * ((m - j) as f64 * std::f64::consts::PI / (m + 1) as f64).cos();
                assert!((x - want).abs() < 1e-12, "m={m} j={j}");
            }
            assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(s.nodes.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn rejects_nonpositive_a() {
        assert!(tridiag_eigs(&[1.0, 0.0], &[0.0; 3], 3).is_err());
    }

    #[test]
    fn weights_match_dense_eigenvectors() {
        let lat = reference().coefficients(40).unwrap();
        let s = tridiag_eigs(&lat.a, &lat.b, 40).unwrap();
        let mut dense = DMatrix::<f64>::zeros(40, 40);
        for i in 0..40 {
            dense[(i, i)] = lat.b[i];
            if i + 1 < 40 {
                dense[(i, i + 1)] = lat.a[i];
                dense[(i + 1, i)] = lat.a[i];
            }
        }
        let eig = dense.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = (0..40).map(|j| (eig.eigenvalues[j], eig.eigenvectors[(0, j)].powi(2))).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (j, (x, w)) in pairs.iter().enumerate() {
            assert!((s.nodes[j] - x).abs() < 1e-10 * (1.0 + x.abs()));
            assert!((s.weights[j] - w).abs() < 1e-10);
        }
    }

    #[test]
    fn sturm_matches_eigs() {
        let lat = reference().coefficients(300).unwrap();
        let s = tridiag_eigs(&lat.a, &lat.b, 300).unwrap();
        for x in [-50.0, -1.3, -0.2, 0.0001, 0.7, 3.0, 80.0] {
            let want = s.nodes.iter().filter(|v| **v < x).count();
            assert_eq!(sturm_count(&lat.a, &lat.b, 300, x), want);
        }
        let ev = eigenvalues_in(&lat.a, &lat.b, 300, 0.5, 3.0);
        let want: Vec<f64> = s.nodes.iter().copied().filter(|v| *v >= 0.5 && *v < 3.0).collect();
        assert_eq!(ev.len(), want.len());
        for (x, y) in ev.iter().zip(&want) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn interlacing() {
        let lat = reference().coefficients(201).unwrap();
        for m in [10usize, 57, 200] {
            let s = tridiag_eigs(&lat.a, &lat.b, m).unwrap();
            let t = tridiag_eigs(&lat.a, &lat.b, m + 1).unwrap();
            for j in 0..m {
                assert!(t.nodes[j] <= s.nodes[j] + 1e-10);
                assert!(s.nodes[j] <= t.nodes[j + 1] + 1e-10);
            }
        }
    }

    #[test]
    fn characteristic_polynomial_is_scaled_w() {
        let pair = double_period(&Modulation::from_vecs(vec![1.0, 2.0], vec![5f64.sqrt(); 2]).unwrap(), DEFAULT_TOL).unwrap();
        let m = pair.modulation();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for size in [1usize, 4, 9, 16] {
            let scale: f64 = (0..size as i64).map(|i| m.alpha().at(i)).product();
            for _ in 0..20 {
                let x: f64 = rng.random_range(-4.0..4.0);
                let mut d = DMatrix::<f64>::zeros(size, size);
                for i in 0..size {
                    d[(i, i)] = x - m.beta().at(i as i64);
                    if i + 1 < size {
                        d[(i, i + 1)] = -m.alpha().at(i as i64);
                        d[(i + 1, i)] = -m.alpha().at(i as i64);
                    }
                }
                let det = d.determinant();
                let w = scale * m.ortho_values(0, size, &x)[size];
                assert!((det - w).abs() <= 1e-8 * det.abs().max(1e-300), "size {size} x {x}: {det} vs {w}");
            }
        }
    }

    #[test]
    fn zeros_of_w_are_nodes() {
        let m = Modulation::from_vecs(vec![1.0, 2.0, 1.5], vec![0.3, -0.4, 0.0]).unwrap();
        for size in [3usize, 8, 12] {
            let roots = real_roots(&m.ortho_polys(0, size).w(size as i64));
            let a: Vec<f64> = (0..size).map(|i| m.alpha().at(i as i64)).collect();
            let b: Vec<f64> = (0..size).map(|i| m.beta().at(i as i64)).collect();
            let s = tridiag_eigs(&a, &b, size).unwrap();
            assert_eq!(roots.len(), size);
            for (r, x) in roots.iter().zip(&s.nodes) {
                assert!((r - x).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn zero_is_not_a_node_of_even_sections() {
        for m in [100usize, 1000] {
            let lat = reference().coefficients(m).unwrap();
            let s = tridiag_eigs(&lat.a, &lat.b, m).unwrap();
            let nearest = s.nodes.iter().fold(f64::INFINITY, |acc, x| acc.min(x.abs()));
            assert!(nearest > 0.0, "m={m} margin {nearest}");
        }
    }

    #[test]
    fn truncated_measure_k0_is_periodic() {
        let spec = reference();
        let s = truncated_measure(&spec, 0, 60).unwrap();
        // a ≡ 1, b ≡ 0 after freezing the first period
        let c = tridiag_eigs(&[1.0; 59], &[0.0; 60], 60).unwrap();
        for (x, y) in s.nodes.iter().zip(&c.nodes) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_moments_agree() {
        let spec = reference();
        let k = 6;
        let m = 20 * k;
        let base = section_measure(&spec, m).unwrap();
        let trunc = truncated_measure(&spec, k, m).unwrap();
        // (J^j e_0)_0 needs a_0..a_{⌈j/2⌉-1}; the truncated section agrees with the base
        // through index K+N-1, so moments agree through order 2(K+N)-1
        for j in 0..=(k + 2) as u32 {
            let (x, y) = (base.moment(j), trunc.moment(j));
            assert!((x - y).abs() <= 1e-8 * x.abs().max(1.0), "order {j}: {x} vs {y}");
        }
    }

    #[test]
    fn truncated_cdf_approaches_base() {
        // both gaps level off near the step size of the sections once K ≳ 40 at this M
        let spec = reference();
        let m = 8000;
        let base = section_measure(&spec, m).unwrap();
        let d: Vec<MeasureDistance> = [0usize, 10, 20, 40]
            .iter()
            .map(|&k| cdf_distance(&truncated_measure(&spec, k, m).unwrap(), &base, 0.5, 3.0))
            .collect();
        assert!(d.windows(2).all(|w| w[1].mean_gap < w[0].mean_gap), "{d:?}");
        assert!(d.windows(2).all(|w| w[1].sup_gap < w[0].sup_gap), "{d:?}");
        let same = cdf_distance(&base, &base, 0.5, 3.0);
        assert_eq!(same.sup_gap, 0.0);
    }

    #[test]
    fn gap_probe_regimes() {
        let m2 = Modulation::from_vecs(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let ladder = [128, 256, 512, 1024, 2048];
        let sqrt = gap_probe(&JacobiSpec::modulated(m2.clone(), GrowthLaw::power(0.5)), 0.2, &ladder).unwrap();
        assert_eq!(sqrt.signal, ProbeSignal::Growing);
        let lin = gap_probe(&JacobiSpec::modulated(m2.clone(), GrowthLaw::power(1.0)), 0.2, &ladder).unwrap();
        assert!(lin.points.iter().all(|p| p.count <= 2));
        assert_eq!(lin.signal, ProbeSignal::Stable);
        let sq = JacobiSpec::modulated(m2, GrowthLaw::power(2.0));
        let p = gap_probe(&sq, 0.2, &ladder).unwrap();
        assert_eq!(p.signal, ProbeSignal::Stable);
        // a wide window still stabilises, with isolated, separated eigenvalues
        let w = window_probe(&sq, -20.0, 20.0, &ladder).unwrap();
        assert_eq!(w.signal, ProbeSignal::Stable);
        assert!(w.points.last().unwrap().min_spacing.unwrap() > 0.1);
        assert!(gap_probe(&sq, 0.0, &ladder).is_err());
    }

    #[test]
    fn degenerate_window_has_zero_gap() {
        let s = tridiag_eigs(&[1.0; 9], &[0.0; 10], 10).unwrap();
        let r = cdf_compare_curve(&[0.0, 1.0], &[1.0, 1.0], &s, 0.5, 0.5).unwrap();
        assert_eq!(r.sup_gap, 0.0);
    }

    #[test]
    fn cdf_compare_against_own_measure_is_small() {
        // semicircle density of the free Jacobi matrix vs its sections
        let xs: Vec<f64> = (0..=4000).map(|j| -2.0 + 4.0 * j as f64 / 4000.0).collect();
        let dens: Vec<f64> = xs.iter().map(|x| (4.0 - x * x).max(0.0).sqrt() / (2.0 * std::f64::consts::PI)).collect();
        let mut last = f64::INFINITY;
        for m in [100usize, 200, 400] {
            let s = tridiag_eigs(&vec![1.0; m - 1], &vec![0.0; m], m).unwrap();
            let r = cdf_compare_curve(&xs, &dens, &s, -1.5, 1.5).unwrap();
            assert!(r.sup_gap < 0.02);
            assert!(r.sup_gap < last);
            last = r.sup_gap;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn measure_invariants(
            a in prop::collection::vec(0.1f64..5.0, 1..60),
            seed_b in prop::collection::vec(-3.0f64..3.0, 61),
        ) {
            let m = a.len() + 1;
            let s = tridiag_eigs(&a, &seed_b, m).unwrap();
            prop_assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(s.nodes.windows(2).all(|w| w[1] > w[0]));
            // first moment and trace
            prop_assert!((s.moment(1) - seed_b[0]).abs() < 1e-9 * (1.0 + seed_b[0].abs() + a[0]));
            let trace: f64 = seed_b[..m].iter().sum();
            prop_assert!((s.nodes.iter().sum::<f64>() - trace).abs() < 1e-9 * (1.0 + trace.abs() + a.iter().sum::<f64>()));
        }
    }
}
