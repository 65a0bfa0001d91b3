//! Fixed float formatting for reproducible text output.

/// 12 significant digits, scientific notation.
pub fn csv_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.11e}")
}
