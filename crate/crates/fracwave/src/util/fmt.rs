//! Byte-stable formatting of floating-point numbers for CSV artifacts.
//!
//! All emitted decimal numbers use exactly 17 significant digits in
//! scientific notation, which round-trips every finite `f64` bit-exactly and
//! yields identical bytes across runs and platforms.

/// Formats `x` with 17 significant digits (`{:.16e}`), the shortest precision
/// guaranteed to round-trip any finite `f64`.
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Joins already-formatted fields into one CSV record line.
pub fn csv_row(fields: &[String]) -> String {
    fields.join(",")
}
