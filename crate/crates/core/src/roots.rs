use crate::poly::Poly;
use nalgebra::DMatrix;

/// Imaginary parts above this are treated as genuinely complex.
pub const IMAG_TOL: f64 = 1e-8;

/// Real roots of `p`, ascending, each Newton-polished.
///
/// Uses the eigenvalues of the companion matrix of the monic polynomial.
pub fn real_roots(p: &Poly<f64>) -> Vec<f64> {
    let deg = match p.degree() {
        None | Some(0) => return Vec::new(),
        Some(d) => d,
    };
    let lead = p.leading();
    if deg == 1 {
        return vec![-p.coeff(0) / lead];
    }
    let mut c = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        c[(i, i - 1)] = 1.0;
    }
    for k in 0..deg {
        c[(k, deg - 1)] = -p.coeff(k) / lead;
    }
    let mut roots: Vec<f64> = c
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= IMAG_TOL)
        .map(|z| polish(p, z.re))
        .collect();
    roots.sort_by(|a, b| a.total_cmp(b));
    roots
}

/// Newton iteration from `x0`, returning the iterate with the smallest residual.
pub fn polish(p: &Poly<f64>, x0: f64) -> f64 {
    let dp = p.derivative();
    let mut x = x0;
    let mut best = (p.eval(&x0).abs(), x0);
    let mut stalled = 0;
    for _ in 0..80 {
        let d = dp.eval(&x);
        if d == 0.0 || best.0 == 0.0 {
            break;
        }
        x -= p.eval(&x) / d;
        if !x.is_finite() {
            break;
        }
        let v = p.eval(&x).abs();
        if v < best.0 {
            best = (v, x);
            stalled = 0;
        } else {
            stalled += 1;
            if stalled == 3 {
                break;
            }
        }
    }
    best.1
}
