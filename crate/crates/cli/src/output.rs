//! CSV formatting and atomic file writes.

use std::io::Write;
use std::path::{Path, PathBuf};

/// 17 significant digits, round-trip exact for f64.
pub fn num(x: f64) -> String {
    // no "-0" in output
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Quotes a CSV field when it contains a separator, quote or newline.
pub fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header plus numeric rows.
pub fn numeric_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.iter().map(|x| num(*x)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

/// Writes via a temporary file in the same directory, then renames.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target).map_err(|e| e.error)?;
    Ok(target)
}
