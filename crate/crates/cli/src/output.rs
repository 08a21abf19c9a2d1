//! Output directory and CSV plumbing.

use std::path::{Path, PathBuf};

use crate::CliError;

/// Creates `dir` (and parents) or reports it as unwritable.
pub fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Unwritable(format!("output directory {}: {e}", dir.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Unwritable(format!("{}: {e}", path.display())))
}

/// Header row then records; `\n` terminators, fields quoted only when needed.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
    let unwritable = |e: &dyn std::fmt::Display| CliError::Unwritable(format!("{}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| unwritable(&e))?;
    w.write_record(header).map_err(|e| unwritable(&e))?;
    for r in rows {
        w.write_record(r).map_err(|e| unwritable(&e))?;
    }
    w.flush().map_err(|e| unwritable(&e))?;
    Ok(path.to_path_buf())
}

/// Shortest round-trip decimal form; blank for undefined values.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{}", x + 0.0)
    } else {
        String::new()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_and_blank_when_undefined() {
        assert_eq!(num(4.0), "4");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(num(f64::NAN), "");
        assert_eq!(opt(None), "");
    }
}
