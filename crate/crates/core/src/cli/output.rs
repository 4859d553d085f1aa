//! CSV/JSON artifacts, written atomically.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::CliError;

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes to a temporary file in the same directory, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::Io(e.to_string()))?;
    tmp.write_all(bytes).map_err(|e| CliError::Io(e.to_string()))?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv { text }
    }

    /// Appends a row of already formatted fields.
    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn write(&self, path: &Path) -> Result<PathBuf, CliError> {
        write_atomic(path, self.text.as_bytes())?;
        Ok(path.to_path_buf())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(path.to_path_buf())
}

/// Reads a numeric CSV written by [`Csv`]: the header and the rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Io(format!("{}: empty file", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .enumerate()
        .map(|(k, line)| {
            line.split(',')
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| CliError::Io(format!("{}:{}: bad number `{f}`", path.display(), k + 2)))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}
