//! Run configuration: a JSON file, overridden by `--set key=value`, overridden by the
//! shared flags `--out`, `--seed` and `--format`.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Settings every command shares.
#[derive(Clone, Debug)]
pub struct Shared {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub format: Format,
}

impl Shared {
    pub fn require_seed(&self, what: &str) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Usage(format!("{what} draws random numbers and requires --seed")))
    }
}

/// Flag values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub set: Vec<String>,
}

fn parse_assignment(s: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = s.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{s}`")))?;
    // Bare words are strings, so `--set path=run/p.json` needs no quoting.
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.into()));
    Ok((key.trim().into(), value))
}

fn take<T: DeserializeOwned>(map: &mut Map<String, Value>, key: &str) -> Result<Option<T>, CliError> {
    map.remove(key)
        .map(|v| serde_json::from_value(v).map_err(|e| CliError::Usage(format!("`{key}`: {e}"))))
        .transpose()
}

/// Merges all sources and deserializes the command record; unknown keys are rejected.
pub fn load<T: DeserializeOwned>(o: &Overrides) -> Result<(T, Shared), CliError> {
    let mut map = match &o.config {
        Some(path) => match crate::formats::read_json::<Value>(path)? {
            Value::Object(m) => m,
            _ => return Err(CliError::Usage(format!("{}: config must be a JSON object", path.display()))),
        },
        None => Map::new(),
    };
    for s in &o.set {
        let (k, v) = parse_assignment(s)?;
        map.insert(k, v);
    }
    let out = o.out.clone().or(take::<PathBuf>(&mut map, "out")?).unwrap_or_else(|| PathBuf::from("out"));
    let seed = o.seed.or(take(&mut map, "seed")?);
    let format = o.format.or(take(&mut map, "format")?).unwrap_or(Format::Json);
    let cfg = serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Usage(format!("config: {e}")))?;
    Ok((cfg, Shared { out, seed, format }))
}

/// Fails with a usage error unless every path names a readable file.
pub fn check_inputs<'a>(paths: impl IntoIterator<Item = &'a Path>) -> Result<(), CliError> {
    for p in paths {
        if !p.is_file() {
            return Err(CliError::Usage(format!("input file {} does not exist", p.display())));
        }
    }
    Ok(())
}
