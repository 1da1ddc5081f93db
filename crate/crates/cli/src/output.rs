//! Metadata block and writers. CSV files carry the metadata as `#` comment
//! lines ahead of the header; JSON files wrap the payload as `result`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const TOOL: &str = "cfkit";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct Metadata {
    command: String,
    config: RunConfig,
    conditions: BTreeMap<String, f64>,
    iterations: BTreeMap<String, usize>,
    extra: BTreeMap<String, Value>,
}

impl Metadata {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Metadata {
            command: command.to_string(),
            config: config.echo(),
            conditions: BTreeMap::new(),
            iterations: BTreeMap::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn condition(&mut self, name: impl Into<String>, value: f64) {
        self.conditions.insert(name.into(), value);
    }

    pub fn iterations(&mut self, name: impl Into<String>, value: usize) {
        self.iterations.insert(name.into(), value);
    }

    pub fn extra(&mut self, name: impl Into<String>, value: impl Serialize) {
        self.extra.insert(
            name.into(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
    }

    pub fn config_hash(&self) -> String {
        let text = serde_json::to_string(&self.config).unwrap_or_default();
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn to_value(&self) -> Value {
        let mut v = json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.command,
            "config": self.config,
            "config_sha256": self.config_hash(),
            "conditions": self.conditions,
            "iterations": self.iterations,
        });
        for (k, x) in &self.extra {
            v[k] = x.clone();
        }
        v
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn real(v: f64) -> String {
    format!("{v:?}")
}

fn emit(out: Option<&str>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::Io(format!("{path}: {e}"))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(bytes).and_then(|_| stdout.flush()) {
                // a closed pipe (`| head`) is the reader's choice, not a failure
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(|e| CliError::Io(e.to_string())),
            }
        }
    }
}

pub fn write_json(
    out: Option<&str>,
    meta: &Metadata,
    result: impl Serialize,
) -> Result<(), CliError> {
    let doc = json!({ "metadata": meta.to_value(), "result": result });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    emit(out, text.as_bytes())
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

pub fn write_csv(out: Option<&str>, meta: &Metadata, table: &Table) -> Result<(), CliError> {
    let mut buf = Vec::new();
    let meta_line =
        serde_json::to_string(&meta.to_value()).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(buf, "# {meta_line}").map_err(|e| CliError::Io(e.to_string()))?;
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(&table.header)
            .map_err(|e| CliError::Io(e.to_string()))?;
        for row in &table.rows {
            w.write_record(row)
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    }
    emit(out, &buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0] {
            assert_eq!(real(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn hash_ignores_output_path() {
        let a = RunConfig {
            t: Some(2),
            out: Some("a.csv".into()),
            ..Default::default()
        };
        let b = RunConfig {
            out: Some("b.csv".into()),
            ..a.clone()
        };
        assert_eq!(
            Metadata::new("moments", &a).config_hash(),
            Metadata::new("moments", &b).config_hash()
        );
    }
}
