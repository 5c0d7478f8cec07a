//! Shortest round-tripping decimal rendering of f64 values.

/// Format `x` with the fewest digits that parse back to the same bits.
///
/// Plain notation for magnitudes in [1e-5, 1e16), scientific otherwise.
/// Non-finite values render as `nan`, `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_owned();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".to_owned() } else { "-inf".to_owned() };
    }
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
