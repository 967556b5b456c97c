//! CSV artifacts and the flat `key = value` config file.

use crate::experiments::Table;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

/// First 16 hex digits of the SHA-256 of the canonical `key=value` lines.
pub fn config_hash(settings: &BTreeMap<String, String>) -> String {
    let mut h = Sha256::new();
    for (k, v) in settings {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Writes `table` to `path` after a comment line with the tool version and
/// the config hash.
pub fn write_csv(path: &Path, table: &Table, hash: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut file = fs::File::create(path)?;
    writeln!(file, "# curlmesh {} config {hash}", env!("CARGO_PKG_VERSION"))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(format!("line {}: bad key {k:?}", n + 1));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}
