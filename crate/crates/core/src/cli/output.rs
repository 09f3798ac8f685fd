use std::path::Path;

use serde_json::{json, Value};

use super::{CliError, Globals, REPORT_VERSION};
use crate::error::Error;

/// JSON schema every `report.json` validates against.
pub const REPORT_SCHEMA: &str = include_str!("../../schemas/report.schema.json");

/// A file written into the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    /// A CSV file with a header row; fields are written verbatim.
    pub fn csv(name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Self, Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(&row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(Artifact { name: name.into(), contents: String::from_utf8(bytes).expect("csv output is UTF-8") })
    }

    /// Pretty JSON with recursively sorted keys and a trailing newline.
    pub fn json(name: &str, value: &Value) -> Self {
        Artifact { name: name.into(), contents: to_sorted_json(value) }
    }

    /// Whitespace-separated columns for gnuplot, one row per line.
    pub fn columns(name: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> Self {
        let mut s = String::new();
        for row in rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        Artifact { name: name.into(), contents: s }
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Resolved parameters, defaults included.
    pub inputs: Value,
    /// Machine-readable results for the report.
    pub outputs: Value,
    pub artifacts: Vec<Artifact>,
    /// Human-readable text printed on success.
    pub stdout: String,
}

pub fn to_sorted_json(value: &Value) -> String {
    let mut v = value.clone();
    v.sort_all_objects();
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn report(command: &str, globals: &Globals, outcome: &Outcome, wall_time: f64) -> Value {
    let files: Vec<&str> = outcome.artifacts.iter().map(|a| a.name.as_str()).collect();
    json!({
        "command": command,
        "inputs": outcome.inputs,
        "seed": globals.seed,
        "outputs": outcome.outputs,
        "artifacts": files,
        "versions": {
            "conic_lmcf": env!("CARGO_PKG_VERSION"),
            "report_format": REPORT_VERSION,
        },
        "wall_time": wall_time,
    })
}

pub fn write_all(command: &str, globals: &Globals, outcome: &Outcome, wall_time: f64) -> Result<(), CliError> {
    let dir: &Path = &globals.out;
    std::fs::create_dir_all(dir).map_err(Error::from)?;
    for a in &outcome.artifacts {
        std::fs::write(dir.join(&a.name), &a.contents).map_err(Error::from)?;
    }
    let rep = Artifact::json("report.json", &report(command, globals, outcome, wall_time));
    std::fs::write(dir.join(&rep.name), &rep.contents).map_err(Error::from)?;
    Ok(())
}

/// Shortest round-trip decimal form of a float.
pub fn num(v: f64) -> String {
    format!("{v}")
}
