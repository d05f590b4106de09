//! Deterministic number formatting and small report-building helpers.
//! Human-readable reports use 6 significant digits, CSV tables 12.

/// Formats with the given number of significant digits, printf %g style:
/// plain decimal for moderate exponents, scientific otherwise. Output is a
/// pure function of the value, so repeated runs are byte-identical.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let d = digits.max(1);
    let sci = format!("{:.*e}", d - 1, x);
    let (mantissa, exp_str) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp_str.parse().expect("exponent value");
    if exp < -4 || exp >= d as i32 {
        // normalize the exponent to e+dd / e-dd
        return format!("{}e{}{:02}", mantissa, if exp < 0 { "-" } else { "+" }, exp.abs());
    }
    // plain decimal with exactly `d` significant digits
    let decimals = (d as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// 6 significant digits (human reports).
pub fn fmt6(x: f64) -> String {
    fmt_sig(x, 6)
}

/// 12 significant digits (CSV tables).
pub fn fmt12(x: f64) -> String {
    fmt_sig(x, 12)
}
