//! Plain-text formatting shared by the CSV writers.

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // keep the sign of negative zero out of the data files
        return "0.0000000000000000e0".into();
    }
    format!("{x:.16e}")
}

/// Joins already formatted fields into one CSV line (no trailing newline).
pub fn csv_row<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = String::new();
    for (i, f) in fields.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(f.as_ref());
    }
    out
}
