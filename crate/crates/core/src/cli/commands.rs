use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use super::output::{num, Artifact, Outcome};
use super::{AsymptoticsArgs, ConeArgs, DefectArgs, ExponentArgs, FlowArgs, FredholmArgs, Globals, HeatArgs, LinkArgs};
use crate::cone_heat::{
    extract_asymptotics, extract_final, fredholm_index, fredholm_index_with_asymptotics, solve_mode, CauchyProblem,
    FitWindow, Forcing, ForcingTable, InnerBoundary, LaplaceTypeSpec, RadialGrid,
};
use crate::error::{Error, Result};
use crate::link_spectrum::mesh::{mesh_spectrum, MeshEigenOptions};
use crate::link_spectrum::{eigenvalues, exponents as exponent_table, off, LinkSpec, Spectrum};
use crate::lmcf_flow::{
    catalog_initial, evolve, linearization_defect, read_field_csv, FlowState, InitialCondition, TorusGrid, CATALOG,
};
use crate::sl_cones::{cone_table, stability_index, ConeDescription, SLCone};
use crate::weighted_norms::WeightVector;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| invalid(format!("cannot open {}: {e}", path.display())))
}

fn identity(dim: usize) -> Vec<f64> {
    (0..dim * dim).map(|i| if i % (dim + 1) == 0 { 1.0 } else { 0.0 }).collect()
}

fn square(flat: &[f64], dim: usize) -> Result<Vec<Vec<f64>>> {
    if flat.len() != dim * dim {
        return Err(invalid(format!("metric needs {} entries for dimension {dim}, got {}", dim * dim, flat.len())));
    }
    Ok(flat.chunks(dim).map(|r| r.to_vec()).collect())
}

/// The link selected by `a`, with its resolved description.
fn resolve_link(a: &LinkArgs) -> Result<(LinkSpec, Value)> {
    let kind = a.link.clone().unwrap_or_else(|| "sphere".into());
    match kind.as_str() {
        "sphere" => {
            let dim = a.dim.unwrap_or(2);
            Ok((LinkSpec::round_sphere(dim), json!({ "link": kind, "dim": dim })))
        }
        "torus" => {
            let dim = a.dim.unwrap_or(2);
            let flat = a.metric.clone().unwrap_or_else(|| identity(dim));
            Ok((LinkSpec::flat_torus(square(&flat, dim)?), json!({ "link": kind, "dim": dim, "metric": flat })))
        }
        "mesh" => {
            let path = a.mesh.as_ref().ok_or_else(|| invalid("--link mesh needs --mesh <file.off>"))?;
            let mesh = off::read_off(path)?;
            Ok((LinkSpec::Mesh(mesh), json!({ "link": kind, "dim": 2, "mesh": path.display().to_string() })))
        }
        other => Err(invalid(format!("unknown link kind '{other}' (expected sphere, torus or mesh)"))),
    }
}

fn link_spectrum(link: &LinkSpec, lambda_max: f64, seed: u64) -> Result<Spectrum> {
    link.validate()?;
    match link {
        LinkSpec::Mesh(mesh) => mesh_spectrum(mesh, lambda_max, &MeshEigenOptions { seed, ..Default::default() }),
        _ => eigenvalues(link, lambda_max),
    }
}

pub fn spectrum(a: &LinkArgs, g: &Globals) -> Result<Outcome> {
    let (link, mut inputs) = resolve_link(a)?;
    let lmax = a.lmax.unwrap_or(10.0);
    inputs["lmax"] = json!(lmax);
    let spec = link_spectrum(&link, lmax, g.seed)?;
    let csv = Artifact::csv(
        "spectrum.csv",
        &["lambda", "multiplicity"],
        spec.iter().map(|e| vec![num(e.lambda), e.multiplicity.to_string()]),
    )?;
    let entries: Vec<Value> =
        spec.iter().map(|e| json!({ "lambda": e.lambda, "multiplicity": e.multiplicity })).collect();
    Ok(Outcome {
        inputs,
        outputs: json!({ "lambda_max": spec.lambda_max, "eigenvalues": entries }),
        stdout: csv.contents.clone(),
        artifacts: vec![csv],
    })
}

pub fn exponents(a: &ExponentArgs, g: &Globals) -> Result<Outcome> {
    let (link, mut inputs) = resolve_link(&a.link)?;
    let m = a.m.unwrap_or(link.dim() + 1);
    let lo = a.lo.unwrap_or(2.0 - m as f64 - 1.0);
    let hi = a.hi.unwrap_or(3.0);
    let deltas = a.delta.clone().unwrap_or_default();
    let top = lo.abs().max(hi.abs()) + m as f64;
    let lmax = a.link.lmax.unwrap_or(top * (top + m as f64 - 2.0));
    inputs["m"] = json!(m);
    inputs["lo"] = json!(lo);
    inputs["hi"] = json!(hi);
    inputs["lmax"] = json!(lmax);
    inputs["delta"] = json!(deltas);
    let spec = link_spectrum(&link, lmax, g.seed)?;
    let table = exponent_table(&spec, m, (lo, hi))?;
    let exps = Artifact::csv(
        "exponents.csv",
        &["alpha", "multiplicity", "lambda"],
        table.entries.iter().map(|e| vec![num(e.alpha), e.multiplicity.to_string(), num(e.lambda)]),
    )?;
    let mut counts = Vec::new();
    for d in &deltas {
        counts.push((*d, table.count_m(*d)?, table.count_n(*d)?));
    }
    let count_csv = Artifact::csv(
        "counts.csv",
        &["delta", "M", "N"],
        counts.iter().map(|(d, mm, n)| vec![num(*d), mm.to_string(), n.to_string()]),
    )?;
    let mut stdout = exps.contents.clone();
    if !counts.is_empty() {
        stdout.push_str(&count_csv.contents);
    }
    Ok(Outcome {
        inputs,
        outputs: json!({
            "window": [table.window.0, table.window.1],
            "exponents": table.entries,
            "counts": counts.iter().map(|(d, mm, n)| json!({ "delta": d, "M": mm, "N": n })).collect::<Vec<_>>(),
        }),
        stdout,
        artifacts: vec![exps, count_csv],
    })
}

fn resolve_cone(a: &ConeArgs) -> Result<(SLCone, Value)> {
    match &a.cone_file {
        Some(path) => {
            let desc: ConeDescription =
                serde_json::from_reader(open(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let cone = SLCone::from_description(desc)?;
            Ok((cone, json!({ "cone_file": path.display().to_string() })))
        }
        None => {
            let name = a.cone.clone().unwrap_or_else(|| "hl-torus-3".into());
            Ok((SLCone::from_catalog(&name)?, json!({ "cone": name })))
        }
    }
}

pub fn stability(a: &ConeArgs) -> Result<Outcome> {
    let (cone, inputs) = resolve_cone(a)?;
    let table = cone_table(&cone, -(cone.m as f64), 3.0)?;
    let rep = stability_index(&cone, &table)?;
    let mut stdout = String::new();
    writeln!(stdout, "cone {}", rep.cone).unwrap();
    writeln!(stdout, "index {}", rep.index).unwrap();
    for (alpha, mult) in &rep.harmonic_counts {
        writeln!(stdout, "harmonics alpha={alpha:.6} count={mult}").unwrap();
    }
    writeln!(stdout, "rank translations {} (bound {})", rep.rank_translations, rep.bound_translations).unwrap();
    writeln!(stdout, "rank su {} (bound {})", rep.rank_su, rep.bound_su).unwrap();
    for w in &rep.warnings {
        writeln!(stdout, "warning: {w}").unwrap();
    }
    let value = serde_json::to_value(&rep).expect("report serializes");
    Ok(Outcome { inputs, artifacts: vec![Artifact::json("stability.json", &value)], outputs: value, stdout })
}

pub fn fredholm(a: &FredholmArgs) -> Result<Outcome> {
    let (cone, mut inputs) = resolve_cone(&a.cone)?;
    let gammas = a.gamma.clone().ok_or_else(|| invalid("fredholm needs --gamma"))?;
    if gammas.is_empty() {
        return Err(invalid("fredholm needs at least one weight"));
    }
    let extended = a.with_asymptotics.unwrap_or(false);
    inputs["gamma"] = json!(gammas);
    inputs["with_asymptotics"] = json!(extended);
    let lo = gammas.iter().copied().fold(0.0, f64::min) - 1.0;
    let hi = gammas.iter().copied().fold(0.0, f64::max) + 1.0;
    let table = cone_table(&cone, lo, hi)?;
    let tables = [table];
    let mut rows = Vec::new();
    for &gamma in &gammas {
        let w = WeightVector::new(vec![gamma])?;
        let index = if extended { fredholm_index_with_asymptotics(&tables, &w)? } else { fredholm_index(&tables, &w)? };
        rows.push((gamma, index));
    }
    let csv =
        Artifact::csv("fredholm.csv", &["gamma", "index"], rows.iter().map(|(g, i)| vec![num(*g), i.to_string()]))?;
    let stdout: String = rows.iter().map(|(_, i)| format!("{i}\n")).collect();
    Ok(Outcome {
        inputs,
        outputs: json!({ "indices": rows.iter().map(|(g, i)| json!({ "gamma": g, "index": i })).collect::<Vec<_>>() }),
        stdout,
        artifacts: vec![csv],
    })
}

fn parse_forcing(text: &str, what: &str) -> Result<Forcing> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn resolve_heat(a: &HeatArgs) -> Result<(CauchyProblem, usize, Value)> {
    let m = a.m.unwrap_or(3);
    let lambda = a.lambda.unwrap_or(0.0);
    let default = RadialGrid::default();
    let grid = RadialGrid::new(
        a.radius.unwrap_or(default.radius),
        a.cells.unwrap_or(default.n_cells),
        a.grading.unwrap_or(default.grading),
    )?;
    let forcing = match (&a.forcing_csv, &a.forcing) {
        (Some(path), _) => Forcing::Table(ForcingTable::from_csv(open(path)?)?),
        (None, Some(text)) => parse_forcing(text, "--forcing")?,
        (None, None) => Forcing::Zero,
    };
    let outer = match &a.outer {
        Some(text) => parse_forcing(text, "--outer")?,
        None => Forcing::Zero,
    };
    let inner = match a.inner.as_deref() {
        None | Some("extrapolate") => InnerBoundary::Extrapolate,
        Some("dirichlet_zero") => InnerBoundary::DirichletZero,
        Some(other) => return Err(invalid(format!("unknown inner boundary '{other}' (extrapolate, dirichlet_zero)"))),
    };
    let problem = CauchyProblem {
        spec: LaplaceTypeSpec::laplacian(m, lambda),
        grid,
        t_end: a.t_end.unwrap_or(0.1),
        dt: a.dt.unwrap_or(1e-3),
        forcing,
        outer,
        inner,
    };
    let snapshots = a.snapshots.unwrap_or(11).max(1);
    let mut inputs = serde_json::to_value(&problem).expect("problem serializes");
    inputs["snapshots"] = json!(snapshots);
    Ok((problem, snapshots, inputs))
}

/// Evenly spaced indices into 0..len, always including the last.
fn spread(len: usize, count: usize) -> Vec<usize> {
    if count <= 1 || len <= 1 {
        return vec![len - 1];
    }
    let mut idx: Vec<usize> = (0..count).map(|i| i * (len - 1) / (count - 1)).collect();
    idx.dedup();
    idx
}

pub fn heat(a: &HeatArgs) -> Result<Outcome> {
    let (problem, snapshots, inputs) = resolve_heat(a)?;
    let sol = solve_mode(&problem)?;
    let picks = spread(sol.times.len(), snapshots);
    let rows = picks.iter().flat_map(|&i| {
        let (t, v) = (sol.times[i], &sol.values[i]);
        sol.nodes.iter().zip(v).map(move |(r, u)| vec![num(t), num(*r), num(*u)])
    });
    let csv = Artifact::csv("heat.csv", &["t", "r", "u"], rows)?;
    let last = sol.last();
    let profile = Artifact::columns("profile.dat", sol.nodes.iter().zip(last).map(|(r, u)| vec![*r, *u]));
    let sup = last.iter().fold(0.0f64, |s, u| s.max(u.abs()));
    let t_final = *sol.times.last().expect("at least the initial time");
    Ok(Outcome {
        inputs,
        outputs: json!({ "t_final": t_final, "steps": sol.times.len() - 1, "sup_u_final": sup, "nodes": sol.nodes.len() }),
        stdout: format!("t = {t_final}\nsup|u| = {sup:e}\n"),
        artifacts: vec![csv, profile],
    })
}

pub fn asymptotics(a: &AsymptoticsArgs) -> Result<Outcome> {
    let (problem, _, mut inputs) = resolve_heat(&a.heat)?;
    let gamma = a.gamma.ok_or_else(|| invalid("asymptotics needs --gamma"))?;
    let m = problem.spec.m;
    let default = FitWindow::for_radius(problem.grid.radius);
    let window = FitWindow { lo: a.window_lo.unwrap_or(default.lo), hi: a.window_hi.unwrap_or(default.hi) };
    let all = a.all_times.unwrap_or(false);
    let link = match a.link.as_deref() {
        None | Some("sphere") => LinkSpec::round_sphere(m - 1),
        Some("torus") => {
            let flat = a.metric.clone().unwrap_or_else(|| identity(m - 1));
            LinkSpec::flat_torus(square(&flat, m - 1)?)
        }
        Some(other) => return Err(invalid(format!("unknown link kind '{other}' (expected sphere or torus)"))),
    };
    let top = gamma.abs() + m as f64 + 2.0;
    let spec = link_spectrum(&link, top * (top + m as f64 - 2.0), 0)?;
    let table = exponent_table(&spec, m, (-top, top))?;
    inputs["gamma"] = json!(gamma);
    inputs["window"] = json!([window.lo, window.hi]);
    inputs["all_times"] = json!(all);
    inputs["link"] = serde_json::to_value(&link).expect("link serializes");
    let sol = solve_mode(&problem)?;
    let expansions = if all {
        extract_asymptotics(&sol, &table, gamma, window)?
    } else {
        vec![extract_final(&sol, &table, gamma, window)?]
    };
    let rows = expansions.iter().flat_map(|e| {
        e.terms
            .iter()
            .map(move |t| vec![num(e.time), num(t.alpha), t.k.to_string(), num(t.exponent()), num(t.coefficient)])
    });
    let csv = Artifact::csv("asymptotics.csv", &["t", "alpha", "k", "exponent", "coefficient"], rows)?;
    let last = expansions.last().expect("at least one expansion");
    let remainder =
        Artifact::columns("remainder.dat", sol.nodes.iter().zip(sol.last()).map(|(r, u)| vec![*r, u - last.eval(*r)]));
    let mut stdout = String::new();
    for t in &last.terms {
        writeln!(stdout, "r^{} (alpha={}, k={}): {:e}", t.exponent(), t.alpha, t.k, t.coefficient).unwrap();
    }
    match last.remainder_rate {
        Some(rate) => writeln!(stdout, "remainder rate {rate}").unwrap(),
        None => writeln!(stdout, "remainder below resolution (sup {:e})", last.remainder_sup).unwrap(),
    }
    for w in &last.warnings {
        writeln!(stdout, "warning: {w}").unwrap();
    }
    let value = serde_json::to_value(&expansions).expect("expansions serialize");
    Ok(Outcome {
        inputs,
        outputs: json!({ "expansions": value }),
        stdout,
        artifacts: vec![csv, remainder, Artifact::json("asymptotics.json", &value)],
    })
}

/// Initial field from a CSV dump, a catalog name or an expression.
fn initial_field(grid: &TorusGrid, initial: &str, amplitude: f64, csv: Option<&Path>) -> Result<Vec<f64>> {
    if let Some(path) = csv {
        return read_field_csv(open(path)?, grid);
    }
    let ic = if CATALOG.iter().any(|(n, _)| *n == initial) {
        catalog_initial(initial, amplitude)?
    } else {
        InitialCondition { expr: initial.to_string(), amplitude }
    };
    ic.sample(grid)
}

pub fn flow(a: &FlowArgs) -> Result<Outcome> {
    let grid = TorusGrid::new(a.m.unwrap_or(2), a.n.unwrap_or(32))?;
    let initial = a.initial.clone().unwrap_or_else(|| "sine".into());
    let amplitude = a.amplitude.unwrap_or(0.1);
    let t_end = a.t_end.unwrap_or(0.5);
    let dt = a.dt.unwrap_or(grid.default_dt());
    let outputs = a.outputs.clone().unwrap_or_else(|| vec![t_end]);
    let u0 = initial_field(&grid, &initial, amplitude, a.field_csv.as_deref())?;
    let run = evolve(&FlowState::new(grid, u0)?, t_end, dt, &outputs)?;
    let rows = run
        .snapshots
        .iter()
        .flat_map(|s| (0..s.u.len()).map(move |i| vec![num(s.t), i.to_string(), num(s.u[i]), num(s.theta[i])]));
    let snaps = Artifact::csv("snapshots.csv", &["t", "node", "u", "theta"], rows)?;
    let series = Artifact::columns("sup_theta.dat", run.times.iter().zip(&run.sup_theta).map(|(t, s)| vec![*t, *s]));
    let summary = json!({
        "times": run.times,
        "sup_theta": run.sup_theta,
        "amplitude": run.amplitude,
        "accepted": run.accepted,
        "rejected": run.rejected,
    });
    let inputs = json!({
        "m": grid.m, "n": grid.n, "initial": initial, "amplitude": amplitude,
        "field_csv": a.field_csv.as_ref().map(|p| p.display().to_string()),
        "t_end": t_end, "dt": dt, "outputs": outputs,
    });
    let stdout = format!(
        "steps {} (rejected {})\nsup|theta| {:e} -> {:e}\n",
        run.accepted,
        run.rejected,
        run.sup_theta[0],
        run.sup_theta.last().expect("initial value present"),
    );
    Ok(Outcome {
        inputs,
        artifacts: vec![snaps, series, Artifact::json("summary.json", &summary)],
        outputs: summary,
        stdout,
    })
}

pub fn defect(a: &DefectArgs) -> Result<Outcome> {
    let grid = TorusGrid::new(a.m.unwrap_or(2), a.n.unwrap_or(64))?;
    let initial = a.initial.clone().unwrap_or_else(|| "sine-cosine".into());
    let eps = a.eps.clone().unwrap_or_else(|| vec![0.1, 0.05, 0.025]);
    let t_end = a.t_end.unwrap_or(0.5);
    let dt = a.dt.unwrap_or(grid.default_dt());
    let u0 = initial_field(&grid, &initial, 1.0, a.field_csv.as_deref())?;
    let rep = linearization_defect(grid, &u0, &eps, t_end, dt)?;
    let rows = rep.epsilons.iter().enumerate().map(|(i, e)| {
        let ratio = if i == 0 { String::new() } else { num(rep.ratios[i - 1]) };
        vec![num(*e), num(rep.defects[i]), ratio]
    });
    let csv = Artifact::csv("defect.csv", &["eps", "defect", "ratio"], rows)?;
    let stdout = csv.contents.clone();
    let inputs = json!({
        "m": grid.m, "n": grid.n, "initial": initial,
        "field_csv": a.field_csv.as_ref().map(|p| p.display().to_string()),
        "eps": eps, "t_end": t_end, "dt": dt,
    });
    Ok(Outcome {
        inputs,
        outputs: serde_json::to_value(&rep).expect("report serializes"),
        stdout,
        artifacts: vec![csv],
    })
}
