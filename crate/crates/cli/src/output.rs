//! CSV writing with a fixed, locale-independent number format.

use std::path::Path;

use crate::{io, CliError};

/// Shortest round-trip decimal; scientific notation outside [1e-4, 1e15).
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn format_optional(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

/// Writes `header` then `rows` with LF line endings.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| io(path, e))?;
    w.write_record(header).map_err(|e| io(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(0.25), "0.25");
        assert_eq!(format_number(12.0), "12");
        assert_eq!(format_number(1.5e-7), "1.5e-7");
        assert_eq!(format_number(-2e20), "-2e20");
        assert_eq!(format_optional(None), "");
    }
}
