//! CSV and metadata emission.
//!
//! CSV files are the data product and must be byte-identical across reruns
//! of the same configuration and seed, so every float is formatted with a
//! fixed precision and nothing time- or machine-dependent goes in. The
//! JSON sidecar carries the run metadata that may legitimately vary
//! (runtime, toolchain hash) plus the unit conversions applied at parse
//! time.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::Command;

/// Fixed-precision float column: enough digits to preserve millimeter
/// resolution at hundred-meter scales, few enough to stay readable.
pub fn col(x: f64) -> String {
    format!("{x:.6}")
}

pub fn col_bool(b: bool) -> String {
    b.to_string()
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "ragged CSV row");
        w.write_record(row)?;
    }
    w.flush()
}

/// Best-effort toolchain provenance for the sidecar.
pub fn git_hash() -> String {
    Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()
        .filter(|out| out.status.success())
        .and_then(|out| String::from_utf8(out.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "unknown".to_string())
}

pub fn write_sidecar(csv_path: &Path, meta: &serde_json::Value) -> io::Result<()> {
    let mut path = PathBuf::from(csv_path);
    path.set_extension("meta.json");
    fs::write(path, format!("{:#}\n", meta))
}

// --------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_rfc4180_quoted_and_stable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let rows = vec![vec!["a,b".to_string(), col(1.25)]];
        write_csv(&path, &["name", "value"], &rows).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "name,value\n\"a,b\",1.250000\n");
    }

    #[test]
    fn sidecar_lands_next_to_the_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_sidecar(&path, &serde_json::json!({ "seed": 7 })).unwrap();
        assert!(dir.path().join("t.meta.json").exists());
    }
}
