//! Number formatting for tabular output.

/// Formats a float with 17 significant digits; parsing it back recovers
/// the exact value.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}
