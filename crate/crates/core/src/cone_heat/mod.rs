//! The linear Cauchy problem ∂ₜu = Du + f, u(0) = 0, on a model cone
//! Σ × (0, R), solved one link eigenmode at a time.
//!
//! On the mode with link eigenvalue λ the cone Laplacian becomes
//! L_λ u = u″ + (m−1) r⁻¹ u′ − λ r⁻² u, and a Laplace-type operator adds a
//! drift X_r u′ and a potential b u. The radial problem is discretized on a
//! graded grid and integrated with backward Euler.

mod asymptotics;
mod grid;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link_spectrum::{alpha_roots, ExponentTable};
use crate::weighted_norms::WeightVector;

pub use asymptotics::{
    extend_asymptotic, extract_asymptotics, extract_final, fit_profile, AsymptoticExpansion, AsymptoticTerm, Extension,
    FitWindow,
};
pub use grid::RadialGrid;

/// c·r^a, or zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    pub coef: f64,
    pub power: f64,
}

impl PowerProfile {
    pub const ZERO: PowerProfile = PowerProfile { coef: 0.0, power: 0.0 };

    pub fn eval(&self, r: f64) -> f64 {
        if self.coef == 0.0 {
            0.0
        } else {
            self.coef * r.powf(self.power)
        }
    }
}

/// A Laplace-type operator restricted to one link eigenmode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceTypeSpec {
    pub m: usize,
    /// Link eigenvalue λ ≥ 0 of the mode.
    pub lambda: f64,
    /// Radial drift X_r = O(r^{δ−1}).
    pub drift: PowerProfile,
    /// Zeroth-order coefficient b = O(r^{δ−2}).
    pub potential: PowerProfile,
    /// Declared perturbation rate δ > 0.
    pub delta: f64,
}

impl LaplaceTypeSpec {
    /// The pure cone Laplacian on the mode λ.
    pub fn laplacian(m: usize, lambda: f64) -> Self {
        LaplaceTypeSpec { m, lambda, drift: PowerProfile::ZERO, potential: PowerProfile::ZERO, delta: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidInput(format!("m must be >= 2, got {}", self.m)));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidInput(format!("mode eigenvalue must be >= 0, got {}", self.lambda)));
        }
        if !(self.delta > 0.0) {
            return Err(Error::InvalidInput(format!(
                "perturbation rate must be positive for a Laplace-type operator, got {}",
                self.delta
            )));
        }
        if self.drift.coef != 0.0 && self.drift.power < self.delta - 1.0 {
            return Err(Error::InvalidInput(format!(
                "drift r^{} decays slower than r^(delta-1) = r^{}",
                self.drift.power,
                self.delta - 1.0
            )));
        }
        if self.potential.coef != 0.0 && self.potential.power < self.delta - 2.0 {
            return Err(Error::InvalidInput(format!(
                "potential r^{} decays slower than r^(delta-2) = r^{}",
                self.potential.power,
                self.delta - 2.0
            )));
        }
        Ok(())
    }

    /// The non-negative root α₊(λ), the slowest admissible growth at 0.
    pub fn alpha_plus(&self) -> f64 {
        alpha_roots(self.lambda, self.m).1
    }
}

/// Tridiagonal discretization of L on the grid. Row j couples nodes j−1,
/// j, j+1; the first and last rows are unused (boundary nodes).
#[derive(Clone, Debug)]
pub struct RadialOperator {
    pub nodes: Vec<f64>,
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Builds L_λ + X_r ∂_r + b. The Laplacian part is in flux form
/// r^{1−m}(r^{m−1}u′)′ with face radii at midpoints, which keeps the
/// off-diagonals positive; the drift uses centered weights.
pub fn radial_operator(spec: &LaplaceTypeSpec, grid: &RadialGrid) -> Result<RadialOperator> {
    spec.validate()?;
    grid.validate()?;
    let r = grid.nodes();
    let n = r.len();
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let p = (spec.m - 1) as i32;
    for j in 1..n - 1 {
        let (hm, hp) = (r[j] - r[j - 1], r[j + 1] - r[j]);
        let (fm, fp) = (0.5 * (r[j] + r[j - 1]), 0.5 * (r[j + 1] + r[j]));
        let vol = r[j].powi(p) * 0.5 * (hm + hp);
        let a_m = fm.powi(p) / hm / vol;
        let a_p = fp.powi(p) / hp / vol;
        let x = spec.drift.eval(r[j]);
        let d_m = -hp / (hm * (hm + hp));
        let d_0 = (hp - hm) / (hm * hp);
        let d_p = hm / (hp * (hm + hp));
        lower[j] = a_m + x * d_m;
        upper[j] = a_p + x * d_p;
        diag[j] = -(a_m + a_p) + x * d_0 - spec.lambda / (r[j] * r[j]) + spec.potential.eval(r[j]);
    }
    for v in lower.iter().chain(&diag).chain(&upper) {
        if !v.is_finite() {
            return Err(Error::InvalidInput("operator coefficients not finite on the grid".into()));
        }
    }
    Ok(RadialOperator { nodes: r, lower, diag, upper })
}

impl RadialOperator {
    /// (L u) at the interior nodes 1..n−1.
    pub fn apply_interior(&self, u: &[f64]) -> Vec<f64> {
        (1..self.nodes.len() - 1)
            .map(|j| self.lower[j] * u[j - 1] + self.diag[j] * u[j] + self.upper[j] * u[j + 1])
            .collect()
    }
}

/// A source term or boundary datum g(t, r).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Forcing {
    Zero,
    /// coef · r^power
    Power {
        coef: f64,
        power: f64,
    },
    /// coef · t · r^power
    TimePower {
        coef: f64,
        power: f64,
    },
    Sum {
        terms: Vec<Forcing>,
    },
    /// Bilinear interpolation in a (t, r) table; constant extension outside.
    Table(ForcingTable),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForcingTable {
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    /// values[i][j] at (times[i], radii[j]).
    pub values: Vec<Vec<f64>>,
}

fn bracket(xs: &[f64], x: f64) -> (usize, usize, f64) {
    if xs.len() == 1 || x <= xs[0] {
        return (0, 0, 0.0);
    }
    if x >= xs[xs.len() - 1] {
        let k = xs.len() - 1;
        return (k, k, 0.0);
    }
    let hi = xs.partition_point(|v| *v <= x);
    let lo = hi - 1;
    (lo, hi, (x - xs[lo]) / (xs[hi] - xs[lo]))
}

impl ForcingTable {
    /// Parses `t,r,f` rows (with an optional header) on a full tensor grid.
    pub fn from_csv(reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(v) if v.len() == 3 => rows.push((v[0], v[1], v[2])),
                Ok(v) => return Err(Error::Parse(format!("expected 3 columns, got {}", v.len()))),
                Err(_) if rows.is_empty() => continue, // header
                Err(e) => return Err(Error::Parse(e.to_string())),
            }
        }
        let mut times: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut radii: Vec<f64> = rows.iter().map(|r| r.1).collect();
        for v in [&mut times, &mut radii] {
            v.sort_by(f64::total_cmp);
            v.dedup();
        }
        if times.len() * radii.len() != rows.len() || rows.is_empty() {
            return Err(Error::Parse("forcing table is not a full (t, r) grid".into()));
        }
        let mut values = vec![vec![f64::NAN; radii.len()]; times.len()];
        for (t, r, f) in rows {
            let i = times.partition_point(|v| *v < t);
            let j = radii.partition_point(|v| *v < r);
            values[i][j] = f;
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Parse("forcing table has missing or non-finite entries".into()));
        }
        Ok(ForcingTable { times, radii, values })
    }

    fn eval(&self, t: f64, r: f64) -> f64 {
        let (i0, i1, a) = bracket(&self.times, t);
        let (j0, j1, b) = bracket(&self.radii, r);
        let row = |i: usize| self.values[i][j0] * (1.0 - b) + self.values[i][j1] * b;
        row(i0) * (1.0 - a) + row(i1) * a
    }
}

impl Forcing {
    pub fn eval(&self, t: f64, r: f64) -> f64 {
        match self {
            Forcing::Zero => 0.0,
            Forcing::Power { coef, power } => coef * r.powf(*power),
            Forcing::TimePower { coef, power } => coef * t * r.powf(*power),
            Forcing::Sum { terms } => terms.iter().map(|f| f.eval(t, r)).sum(),
            Forcing::Table(table) => table.eval(t, r),
        }
    }
}

/// How the innermost node r_min is closed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerBoundary {
    /// u(r₁) extrapolated from u(r₂), u(r₃) within span{r^{α₊}, r^{α₊+2}}.
    #[default]
    Extrapolate,
    /// u(r₁) = 0.
    DirichletZero,
}

/// Everything needed to integrate one mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyProblem {
    pub spec: LaplaceTypeSpec,
    pub grid: RadialGrid,
    pub t_end: f64,
    pub dt: f64,
    pub forcing: Forcing,
    /// Dirichlet datum at r = R, evaluated as g(t, R).
    pub outer: Forcing,
    #[serde(default)]
    pub inner: InnerBoundary,
}

/// u(tᵢ, r_j) at every time step, including t = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution {
    pub grid: RadialGrid,
    pub nodes: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub lambda: f64,
    pub m: usize,
}

impl ModeSolution {
    pub fn last(&self) -> &[f64] {
        self.values.last().expect("at least the initial state")
    }
}

/// Weights (c₂, c₃) with u(r₁) = c₂u(r₂) + c₃u(r₃) exact on r^α and r^{α+2}.
fn extrapolation_weights(r: &[f64], alpha: f64) -> (f64, f64) {
    let f = |x: f64, e: f64| (x / r[1]).powf(e);
    let (a11, a12, b1) = (f(r[1], alpha), f(r[2], alpha), f(r[0], alpha));
    let (a21, a22, b2) = (f(r[1], alpha + 2.0), f(r[2], alpha + 2.0), f(r[0], alpha + 2.0));
    let det = a11 * a22 - a12 * a21;
    ((b1 * a22 - a12 * b2) / det, (a11 * b2 - b1 * a21) / det)
}

/// Thomas algorithm; None on a zero or non-finite pivot.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> Option<()> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return None;
    }
    c[0] = upper[0] / beta;
    rhs[0] /= beta;
    for i in 1..n {
        beta = diag[i] - lower[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return None;
        }
        c[i] = upper[i] / beta;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    rhs.iter().all(|v| v.is_finite()).then_some(())
}

/// Backward-Euler integration of ∂ₜu = Lu + f from u(0) = 0.
pub fn solve_mode(problem: &CauchyProblem) -> Result<ModeSolution> {
    let CauchyProblem { spec, grid, t_end, dt, forcing, outer, inner } = problem;
    if !(*dt > 0.0) || !(*t_end > 0.0) {
        return Err(Error::InvalidInput(format!("need dt > 0 and T > 0, got dt = {dt}, T = {t_end}")));
    }
    let op = radial_operator(spec, grid)?;
    let r = &op.nodes;
    let n = r.len();
    if n < 4 {
        return Err(Error::InvalidInput("grid needs at least 3 cells".into()));
    }
    let steps = (t_end / dt).round().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let (c2, c3) = match inner {
        InnerBoundary::Extrapolate => extrapolation_weights(r, spec.alpha_plus()),
        InnerBoundary::DirichletZero => (0.0, 0.0),
    };

    // Unknowns are nodes 1..n−2; build I − dt·L with u₀ eliminated.
    let k = n - 2;
    let mut lo = vec![0.0; k];
    let mut di = vec![0.0; k];
    let mut up = vec![0.0; k];
    for i in 0..k {
        let j = i + 1;
        lo[i] = -dt * op.lower[j];
        di[i] = 1.0 - dt * op.diag[j];
        up[i] = -dt * op.upper[j];
    }
    di[0] += -dt * op.lower[1] * c2;
    up[0] += -dt * op.lower[1] * c3;
    lo[0] = 0.0;
    let last_upper = -dt * op.upper[n - 2];
    up[k - 1] = 0.0;

    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    times.push(0.0);
    values.push(vec![0.0; n]);
    let mut u = vec![0.0; n];
    for s in 1..=steps {
        let t = s as f64 * dt;
        let mut rhs: Vec<f64> = (1..n - 1).map(|j| u[j] + dt * forcing.eval(t, r[j])).collect();
        let g = outer.eval(t, r[n - 1]);
        rhs[k - 1] -= last_upper * g;
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("forcing not finite at t = {t}")));
        }
        solve_tridiagonal(&lo, &di, &up, &mut rhs).ok_or(Error::LinearSolve { step: s, time: t })?;
        u[1..n - 1].copy_from_slice(&rhs);
        u[0] = c2 * u[1] + c3 * u[2];
        u[n - 1] = g;
        times.push(t);
        values.push(u.clone());
    }
    Ok(ModeSolution { grid: grid.clone(), nodes: r.clone(), times, values, lambda: spec.lambda, m: spec.m })
}

/// Solves independent modes concurrently; results keep the input order.
pub fn solve_modes(problems: &[CauchyProblem]) -> Vec<Result<ModeSolution>> {
    crate::parallel::install(|| problems.par_iter().map(solve_mode).collect())
}

fn check_weights(tables: &[ExponentTable], gamma: &WeightVector) -> Result<()> {
    if tables.len() != gamma.len() {
        return Err(Error::InvalidInput(format!("{} exponent tables but {} weights", tables.len(), gamma.len())));
    }
    Ok(())
}

/// Index −Σᵢ M_{Σᵢ}(γᵢ) of the weighted Laplacian; fails if any γᵢ ∈ D_{Σᵢ}.
pub fn fredholm_index(tables: &[ExponentTable], gamma: &WeightVector) -> Result<i64> {
    check_weights(tables, gamma)?;
    let bad: Vec<(usize, f64, f64)> = tables
        .iter()
        .zip(&gamma.gamma)
        .enumerate()
        .filter(|(_, (t, g))| t.is_exceptional(**g))
        .map(|(i, (t, g))| (i, *g, t.nearest_exponent(*g).unwrap_or(f64::NAN)))
        .collect();
    if !bad.is_empty() {
        return Err(Error::ExceptionalWeight { components: bad });
    }
    let mut total = 0;
    for (t, g) in tables.iter().zip(&gamma.gamma) {
        total += t.count_m(*g)?;
    }
    Ok(-total)
}

/// Index of the Laplacian extended by discrete asymptotics: zero whenever
/// every 2 − m < γᵢ lies off E_{Σᵢ}.
pub fn fredholm_index_with_asymptotics(tables: &[ExponentTable], gamma: &WeightVector) -> Result<i64> {
    check_weights(tables, gamma)?;
    let mut bad = Vec::new();
    for (i, (t, g)) in tables.iter().zip(&gamma.gamma).enumerate() {
        let lower = 2.0 - t.m as f64;
        if *g <= lower {
            return Err(Error::WeightOutOfRange { index: i, gamma: *g, lower });
        }
        let d = t.distance_to_e(*g)?;
        if d <= t.tol {
            bad.push((i, *g, t.e_set(g - 2.0 * t.tol, g + 2.0 * t.tol)?[0]));
        }
    }
    if !bad.is_empty() {
        return Err(Error::ExceptionalWeight { components: bad });
    }
    Ok(0)
}

#[cfg(test)]
mod tests;
