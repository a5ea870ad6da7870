//! Stable float formatting for emitted CSV files: 17 significant digits,
//! `.` decimal separator, scientific notation.

pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}
