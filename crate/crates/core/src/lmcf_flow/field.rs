use serde::{Deserialize, Serialize};

use super::TorusGrid;
use crate::error::{Error, Result};

/// Named initial potentials; all are graphs well inside the graph
/// condition at amplitude ≤ 0.2.
pub const CATALOG: &[(&str, &str)] = &[
    ("sine", "sin(x1)"),
    ("sine-cosine", "sin(x1) + cos(2*x2)"),
    ("product", "sin(x1)*sin(x2)"),
    ("diagonal", "cos(x1 + x2) + 0.5*sin(x1 - 2*x2)"),
    ("mixed", "0.6*cos(x1)*cos(x2) + 0.4*sin(3*x2) - 0.3*cos(2*x1)"),
];

/// An initial potential given as an expression in x1, x2, x3 scaled by
/// `amplitude`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub expr: String,
    pub amplitude: f64,
}

pub fn catalog_initial(name: &str, amplitude: f64) -> Result<InitialCondition> {
    CATALOG
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, e)| InitialCondition { expr: e.to_string(), amplitude })
        .ok_or_else(|| {
            let names: Vec<&str> = CATALOG.iter().map(|(n, _)| *n).collect();
            Error::InvalidInput(format!("unknown initial condition '{name}' (known: {})", names.join(", ")))
        })
}

/// Parses an expression over {sin, cos, products, constants} in x1..x3.
pub fn parse_initial(expr: &str) -> Result<impl Fn([f64; 3]) -> f64> {
    use fasteval::{Compiler, Evaler};
    let err = |e: fasteval::Error| Error::Parse(format!("'{expr}': {e:?}"));
    let mut slab = fasteval::Slab::new();
    let compiled =
        fasteval::Parser::new().parse(expr, &mut slab.ps).map_err(err)?.from(&slab.ps).compile(&slab.ps, &mut slab.cs);
    let eval = move |x: [f64; 3]| {
        compiled.eval(&slab, &mut |name: &str, _: Vec<f64>| match name {
            "x1" => Some(x[0]),
            "x2" => Some(x[1]),
            "x3" => Some(x[2]),
            _ => None,
        })
    };
    // A probe evaluation rejects unknown variables up front.
    eval([0.0; 3]).map_err(err)?;
    Ok(move |x: [f64; 3]| eval(x).unwrap_or(f64::NAN))
}

impl InitialCondition {
    pub fn sample(&self, grid: &TorusGrid) -> Result<Vec<f64>> {
        let f = parse_initial(&self.expr)?;
        let u = grid.sample(|x| self.amplitude * f(x));
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("initial condition '{}' is not finite on the grid", self.expr)));
        }
        Ok(u)
    }
}

/// Reads a `node,u` CSV field dump (header optional).
pub fn read_field_csv(reader: impl std::io::Read, grid: &TorusGrid) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut u = vec![f64::NAN; grid.len()];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let node = rec.get(0).and_then(|s| s.parse::<usize>().ok());
        let value = rec.get(1).and_then(|s| s.parse::<f64>().ok());
        match (node, value) {
            (Some(i), Some(v)) if i < grid.len() => u[i] = v,
            (Some(i), Some(_)) => return Err(Error::Parse(format!("node {i} outside the grid"))),
            _ if line == 0 => continue,
            _ => return Err(Error::Parse(format!("bad field row {}", line + 1))),
        }
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parse("field dump does not cover every node".into()));
    }
    Ok(u)
}
