//! Shared tolerances and the canonical number formatting used by every
//! serialised artefact.

/// Absolute tolerance for weight sums and belief equality.
pub const TOL: f64 = 1e-9;

/// Significant digits kept when numbers are written to JSON or DSL text.
pub const SIG_DIGITS: usize = 12;

/// Rounds `x` to [`SIG_DIGITS`] significant digits.
///
/// Non-finite values and zero pass through unchanged. Negative zero is folded
/// to positive zero so that serialised output never contains `-0`.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    let s = format!("{:.*e}", SIG_DIGITS - 1, x);
    s.parse().unwrap_or(x)
}

/// Shortest decimal text for an already-rounded number.
pub fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    if r.fract() == 0.0 && r.abs() < 1e15 {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}
