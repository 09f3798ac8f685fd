//! Batch front end: one experiment per invocation, artifacts on disk.
//!
//! Every subcommand can be driven by flags, by a JSON config file passed
//! with `--config`, or both. Config keys are the flag names in snake_case
//! (`--t-end` ↔ `"t_end"`); an optional `"command"` key must match the
//! subcommand, and `"out"` / `"seed"` set the global options. Flags given
//! on the command line override the config file, which overrides the
//! built-in defaults.
//!
//! Exit codes: 0 on success, 2 for usage or validation errors, 1 for
//! numerical failures.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::Error;

pub use output::{Artifact, Outcome, REPORT_SCHEMA};

/// Schema version written into every report.
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "conic-lmcf", version, about = "Experiments on special Lagrangian cones and Lagrangian MCF")]
pub struct Cli {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV/JSON artifacts and report.json.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized steps (mesh eigensolver start vectors).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of the link Laplacian up to a bound.
    Spectrum(LinkArgs),
    /// Exponent set of the cone over a link, with counting functions.
    Exponents(ExponentArgs),
    /// Stability index of a special Lagrangian cone.
    Stability(ConeArgs),
    /// Fredholm index of the weighted Laplacian on a cone.
    Fredholm(FredholmArgs),
    /// Heat equation for one angular mode on a model cone.
    Heat(HeatArgs),
    /// Heat solve followed by discrete-asymptotics extraction.
    Asymptotics(AsymptoticsArgs),
    /// Lagrangian mean curvature flow of a graph over the flat torus.
    Flow(FlowArgs),
    /// Defect between the flow and its linearization for shrinking data.
    Defect(DefectArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Exponents(_) => "exponents",
            Command::Stability(_) => "stability",
            Command::Fredholm(_) => "fredholm",
            Command::Heat(_) => "heat",
            Command::Asymptotics(_) => "asymptotics",
            Command::Flow(_) => "flow",
            Command::Defect(_) => "defect",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct LinkArgs {
    /// Link kind: sphere, torus or mesh.
    #[arg(long)]
    pub link: Option<String>,
    /// Link dimension (sphere or torus).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Upper bound on the eigenvalues of −Δ.
    #[arg(long)]
    pub lmax: Option<f64>,
    /// Flat-torus metric, row-major and comma separated (default: identity).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub metric: Option<Vec<f64>>,
    /// Triangulated surface in OFF format (for --link mesh).
    #[arg(long)]
    pub mesh: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ExponentArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub link: LinkArgs,
    /// Cone dimension (default: link dimension + 1).
    #[arg(long)]
    pub m: Option<usize>,
    /// Lower end of the exponent window.
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    /// Upper end of the exponent window.
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    /// Weights at which to evaluate the counting functions M and N.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub delta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ConeArgs {
    /// Catalog cone (hl-torus-3, plane-3).
    #[arg(long)]
    pub cone: Option<String>,
    /// JSON cone description, used instead of --cone.
    #[arg(long)]
    pub cone_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct FredholmArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub cone: ConeArgs,
    /// Weights γ; one index is reported per weight.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gamma: Option<Vec<f64>>,
    /// Report the index of the operator extended by discrete asymptotics.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub with_asymptotics: Option<bool>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct HeatArgs {
    /// Cone dimension.
    #[arg(long)]
    pub m: Option<usize>,
    /// Link eigenvalue of the mode.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Outer radius R.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Number of radial cells.
    #[arg(long)]
    pub cells: Option<usize>,
    /// Grading exponent q of r_j = R (j/n)^q.
    #[arg(long)]
    pub grading: Option<f64>,
    /// Final time.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Backward-Euler time step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Source term as JSON, e.g. {"kind":"power","coef":1,"power":0.5}.
    #[arg(long)]
    pub forcing: Option<String>,
    /// Source term as a t,r,f CSV table (overrides --forcing).
    #[arg(long)]
    pub forcing_csv: Option<PathBuf>,
    /// Dirichlet datum at r = R as JSON (default: zero).
    #[arg(long)]
    pub outer: Option<String>,
    /// Inner closure: extrapolate or dirichlet_zero.
    #[arg(long)]
    pub inner: Option<String>,
    /// Number of evenly spaced time levels written to heat.csv.
    #[arg(long)]
    pub snapshots: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub heat: HeatArgs,
    /// Weight γ: terms with exponent below γ are extracted.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Lower radius of the remainder fit window (default R/2048).
    #[arg(long)]
    pub window_lo: Option<f64>,
    /// Upper radius of the remainder fit window (default R/8).
    #[arg(long)]
    pub window_hi: Option<f64>,
    /// Fit every time level instead of only the last.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub all_times: Option<bool>,
    /// Link kind for the exponent table: sphere (default) or torus.
    #[arg(long)]
    pub link: Option<String>,
    /// Flat-torus metric for --link torus, row-major.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub metric: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct FlowArgs {
    /// Torus dimension (1..=3).
    #[arg(long)]
    pub m: Option<usize>,
    /// Grid points per axis.
    #[arg(long)]
    pub n: Option<usize>,
    /// Catalog name or expression in x1, x2, x3.
    #[arg(long)]
    pub initial: Option<String>,
    /// Factor applied to the initial expression.
    #[arg(long, allow_hyphen_values = true)]
    pub amplitude: Option<f64>,
    /// Initial field as a node,u CSV dump (overrides --initial).
    #[arg(long)]
    pub field_csv: Option<PathBuf>,
    /// Final time.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Time step (default 0.25·dx²).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Snapshot times written to snapshots.csv (default: final time).
    #[arg(long, value_delimiter = ',')]
    pub outputs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct DefectArgs {
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Catalog name or expression for u0.
    #[arg(long)]
    pub initial: Option<String>,
    /// Initial field as a node,u CSV dump (overrides --initial).
    #[arg(long)]
    pub field_csv: Option<PathBuf>,
    /// Strictly decreasing amplitudes ε.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Final time.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Time step (default 0.25·dx²).
    #[arg(long)]
    pub dt: Option<f64>,
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(e) if e.is_numerical() => 1,
            CliError::Run(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

/// Global options after merging the config file.
#[derive(Debug, Clone)]
pub struct Globals {
    pub out: PathBuf,
    pub seed: u64,
}

pub const DEFAULT_OUT: &str = "conic-lmcf-out";
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Overlays the flags (non-null fields of `flags`) on the config values
/// and deserializes the result. Unknown config keys are rejected.
fn merge<T: Serialize + DeserializeOwned + Default>(flags: &T, config: &Map<String, Value>) -> Result<T, CliError> {
    let known = match serde_json::to_value(T::default()) {
        Ok(Value::Object(m)) => m,
        _ => unreachable!("argument structs serialize to objects"),
    };
    let mut merged = Map::new();
    for (k, v) in config {
        if !known.contains_key(k) {
            let mut keys: Vec<&String> = known.keys().collect();
            keys.sort();
            return Err(CliError::Usage(format!("unknown config key '{k}' (expected one of {keys:?})")));
        }
        merged.insert(k.clone(), v.clone());
    }
    if let Ok(Value::Object(f)) = serde_json::to_value(flags) {
        for (k, v) in f {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
}

/// Config entries for the subcommand, plus the global `out` and `seed` it may set.
type ConfigFile = (Map<String, Value>, Option<PathBuf>, Option<u64>);

fn read_config(path: &Path, command: &str) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(m)) => m,
        Ok(_) => return Err(CliError::Usage("config must be a JSON object".into())),
        Err(e) => return Err(CliError::Usage(format!("invalid config JSON: {e}"))),
    };
    if let Some(c) = map.remove("command") {
        if c.as_str() != Some(command) {
            return Err(CliError::Usage(format!("config is for command {c}, not '{command}'")));
        }
    }
    let out = match map.remove("out") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(v) => return Err(CliError::Usage(format!("config key 'out' must be a string, got {v}"))),
    };
    let seed = match map.remove("seed") {
        None => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| CliError::Usage(format!("config key 'seed' must be a non-negative integer, got {v}")))?,
        ),
    };
    Ok((map, out, seed))
}

/// Parses `argv`, runs the experiment and writes its artifacts. Returns
/// the process exit code; messages go to stdout/stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match crate::parallel::install(|| execute(&cli)) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed invocation and writes its artifacts.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let name = cli.command.name();
    let (config, cfg_out, cfg_seed) = match &cli.config {
        Some(p) => read_config(p, name)?,
        None => (Map::new(), None, None),
    };
    let globals = Globals {
        out: cli.out.clone().or(cfg_out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        seed: cli.seed.or(cfg_seed).unwrap_or(DEFAULT_SEED),
    };
    let outcome = match &cli.command {
        Command::Spectrum(a) => commands::spectrum(&merge(a, &config)?, &globals)?,
        Command::Exponents(a) => commands::exponents(&merge(a, &config)?, &globals)?,
        Command::Stability(a) => commands::stability(&merge(a, &config)?)?,
        Command::Fredholm(a) => commands::fredholm(&merge(a, &config)?)?,
        Command::Heat(a) => commands::heat(&merge(a, &config)?)?,
        Command::Asymptotics(a) => commands::asymptotics(&merge(a, &config)?)?,
        Command::Flow(a) => commands::flow(&merge(a, &config)?)?,
        Command::Defect(a) => commands::defect(&merge(a, &config)?)?,
    };
    output::write_all(name, &globals, &outcome, start.elapsed().as_secs_f64())?;
    Ok(outcome)
}

#[cfg(test)]
mod tests;
