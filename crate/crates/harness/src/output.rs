//! CSV and JSON writers and run metadata.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::HarnessError;

/// Version of the CSV layouts written by this crate.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// SHA-256 of the resolved configuration, serialized as JSON.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("configuration serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Io(std::io::Error::other(e))
}

/// Writes rows as CSV after a `# schema=…,config_sha256=…` comment line.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], hash: &str, mut out: W) -> Result<(), HarnessError> {
    writeln!(out, "# schema={SCHEMA_VERSION},config_sha256={hash}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes rows as a JSON document `{schema, config_sha256, rows}`.
pub fn write_json<T: Serialize, W: Write>(rows: &[T], hash: &str, mut out: W) -> Result<(), HarnessError> {
    let doc = serde_json::json!({ "schema": SCHEMA_VERSION, "config_sha256": hash, "rows": rows });
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| HarnessError::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

pub fn write_rows<T: Serialize, W: Write>(rows: &[T], hash: &str, format: Format, out: W) -> Result<(), HarnessError> {
    match format {
        Format::Csv => write_csv(rows, hash, out),
        Format::Json => write_json(rows, hash, out),
    }
}

/// Sidecar describing a run. Worker counts and wall-clock times are left out so that the
/// file depends only on the configuration and seed.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub subcommand: String,
    pub seed: Option<u64>,
    pub config_sha256: String,
    pub schema: u32,
    pub versions: BTreeMap<String, String>,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
}

impl Metadata {
    pub fn new<T: Serialize>(subcommand: &str, seed: Option<u64>, config: &T, outputs: Vec<String>) -> Self {
        let version = env!("CARGO_PKG_VERSION").to_string();
        let versions = ["harness", "sde", "estimator", "biascalc", "spotvol"].iter().map(|c| (c.to_string(), version.clone())).collect();
        Self {
            tool: "harness".into(),
            subcommand: subcommand.into(),
            seed,
            config_sha256: config_hash(config),
            schema: SCHEMA_VERSION,
            versions,
            config: serde_json::to_value(config).expect("configuration serializes"),
            outputs,
        }
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<(), HarnessError> {
        serde_json::to_writer_pretty(&mut out, self).map_err(|e| HarnessError::Io(e.into()))?;
        writeln!(out)?;
        Ok(())
    }
}
