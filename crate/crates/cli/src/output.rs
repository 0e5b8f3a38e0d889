use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Settings shared by every command, echoed into each artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    /// Blahut–Arimoto gap for exact leakages.
    pub capacity_tol: f64,
    pub eps: Vec<f64>,
    pub budget: usize,
    pub bound_slack: f64,
    pub spectral_tol: f64,
}

/// A command result: the JSON body and a flat table for CSV output.
pub struct Output {
    pub body: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Output {
    pub fn new(body: impl Serialize, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> CliResult<Self> {
        Ok(Self { body: serde_json::to_value(body)?, header, rows })
    }
}

/// Shortest round-trip text for a float; non-finite values spelled out.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn render(meta: &Meta, out: &Output, format: Format) -> CliResult<Vec<u8>> {
    match format {
        Format::Json => {
            let doc = json!({ "meta": meta, "result": out.body });
            let mut bytes = serde_json::to_vec_pretty(&doc)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let mut bytes = Vec::new();
            let meta_line = serde_json::to_string(meta)?;
            writeln!(bytes, "# meta {meta_line}").expect("writing to memory");
            let mut w = csv::Writer::from_writer(bytes);
            w.write_record(&out.header)?;
            for row in &out.rows {
                w.write_record(row)?;
            }
            w.into_inner().map_err(|e| CliError::new(crate::error::Kind::Internal, e.to_string()))
        }
    }
}

pub fn emit(meta: &Meta, out: &Output, format: Format, path: Option<&Path>) -> CliResult<()> {
    let bytes = render(meta, out, format)?;
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout().write_all(&bytes).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}
