use std::io::Write;
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::CliError;

/// Writes `contents` to `path` through a temporary file in the same
/// directory, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, contents: &[u8]) -> Result<(), CliError> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents)?;
            out.flush()?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = NamedTempFile::new_in(dir)?;
            tmp.write_all(contents)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| CliError::from(e.error))?;
        }
    }
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

/// 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}
