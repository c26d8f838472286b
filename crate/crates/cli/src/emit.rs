//! Deterministic report emission: fixed field order, floats at 17 significant digits,
//! and a sha256 manifest over everything written.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// `x` with 17 significant digits; non-finite values become `null`.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, k: usize| out.extend(std::iter::repeat_n("  ", k));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) if !n.is_f64() => write!(out, "{u}").unwrap(),
            (_, Some(i)) if !n.is_f64() => write!(out, "{i}").unwrap(),
            _ => out.push_str(&float(n.as_f64().unwrap_or(f64::NAN))),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            // Short arrays of scalars stay on one line: operator entries, edges, factors.
            if items.len() <= 4 && items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (k, x) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, 0);
                }
                out.push(']');
                return;
            }
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, x) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, x)) in map.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, indent + 1);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Canonical JSON text of `value`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Failed(format!("serialization: {e}")))?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

/// A CSV cell.
pub enum Cell {
    Int(u64),
    Real(f64),
}

pub fn to_csv(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Int(i) => i.to_string(),
                Cell::Real(x) => float(*x),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    path: &'a str,
    sha256: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    passed: bool,
    files: Vec<ManifestEntry<'a>>,
}

/// Output files of one command, written together with `manifest.json`.
pub struct Bundle {
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

impl Bundle {
    pub fn new(dir: PathBuf) -> Self {
        Self { dir, files: BTreeMap::new() }
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.files.insert(name.into(), to_json(value)?);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<Cell>]) {
        self.files.insert(name.into(), to_csv(header, rows));
    }

    /// Writes every file and the manifest.
    pub fn write(self, command: &str, passed: bool) -> Result<(), CliError> {
        let unwritable = |e: std::io::Error| CliError::Usage(format!("cannot write to {}: {e}", self.dir.display()));
        std::fs::create_dir_all(&self.dir).map_err(unwritable)?;
        let mut entries = Vec::new();
        for (name, text) in &self.files {
            std::fs::write(self.dir.join(name), text).map_err(unwritable)?;
            entries.push(ManifestEntry { path: name, sha256: hex::encode(Sha256::digest(text.as_bytes())), bytes: text.len() });
        }
        let manifest = to_json(&Manifest { command, passed, files: entries })?;
        std::fs::write(self.dir.join("manifest.json"), manifest).map_err(unwritable)
    }
}
