use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::CliError;

/// Nine significant digits.
pub fn fmt9(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else {
        format!("{x}")
    }
}

/// Writes provenance-stamped CSV and JSON files into one directory.
pub struct Output {
    pub dir: PathBuf,
    pub hash: String,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, hash: &str) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Output { dir: dir.to_path_buf(), hash: hash.to_string(), written: Vec::new() })
    }

    pub fn sub(&self, name: &str) -> Result<Self, CliError> {
        Output::new(&self.dir.join(name), &self.hash)
    }

    fn header(&self) -> String {
        format!("# bec-focus {} config_hash={}\n", env!("CARGO_PKG_VERSION"), self.hash)
    }

    /// Numeric CSV.
    pub fn csv<I>(&mut self, name: &str, columns: &[&str], rows: I) -> Result<PathBuf, CliError>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        self.csv_text(name, columns, rows.into_iter().map(|r| r.into_iter().map(fmt9).collect()))
    }

    /// CSV with preformatted cells.
    pub fn csv_text<I>(&mut self, name: &str, columns: &[&str], rows: I) -> Result<PathBuf, CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut s = self.header();
        s.push_str(&columns.join(","));
        s.push('\n');
        for r in rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        self.write(name, s)
    }

    /// JSON object with `config_hash` and `version` fields added.
    pub fn json(&mut self, name: &str, mut value: Value) -> Result<PathBuf, CliError> {
        if let Value::Object(m) = &mut value {
            m.insert("config_hash".into(), json!(self.hash));
            m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        } else {
            value = json!({ "data": value, "config_hash": self.hash, "version": env!("CARGO_PKG_VERSION") });
        }
        let mut s = serde_json::to_string_pretty(&value).map_err(|e| CliError::numeric(e.to_string()))?;
        let _ = writeln!(s);
        self.write(name, s)
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<PathBuf, CliError> {
        let p = self.dir.join(name);
        fs::write(&p, data).map_err(|e| CliError::io(&p, e))?;
        self.written.push(p.clone());
        Ok(p)
    }

    fn write(&mut self, name: &str, s: String) -> Result<PathBuf, CliError> {
        self.bytes(name, s.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(fmt9(1.0), "1.00000000e0");
        assert_eq!(fmt9(-0.000123456789123), "-1.23456789e-4");
        assert_eq!(fmt9(f64::NAN), "NaN");
    }

    #[test]
    fn provenance_in_every_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Output::new(dir.path(), "abc").unwrap();
        let c = out.csv("a.csv", &["x"], vec![vec![1.5]]).unwrap();
        let j = out.json("a.json", json!({"f": 1.0})).unwrap();
        assert!(fs::read_to_string(c).unwrap().starts_with("# bec-focus 0.1.0 config_hash=abc\nx\n1.50000000e0"));
        let v: Value = serde_json::from_str(&fs::read_to_string(j).unwrap()).unwrap();
        assert_eq!(v["config_hash"], "abc");
    }
}
