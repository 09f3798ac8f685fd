//! Lagrangian mean curvature flow of gradient graphs over the flat torus
//! T^m = ℝ^m / 2πℤ^m, in the scalar-potential form ∂ₜu = θ(Γ_{du}).
//!
//! For the graph of du in ℂ^m = T*ℝ^m the tangent space is spanned by the
//! columns of I + i·Hess u, so the holomorphic volume form restricts to
//! det(I + i·Hess u) dx and the Lagrangian angle is
//! θ = arg det(I + i·Hess u) = Σ arctan λᵢ(Hess u).
//! Its linearization at u = 0 is Δu, so the flow is a nonlinear heat
//! equation. Steps are semi-implicit: Δu implicitly (factored circulant solve on the
//! periodic grid), θ(u) − Δu explicitly.

mod field;
mod spectral;

use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use field::{catalog_initial, parse_initial, read_field_csv, InitialCondition, CATALOG};
pub use spectral::HeatSolver;

/// Threshold on det(I + Hess u) below which a node violates the graph condition.
pub const GRAPH_DET_MIN: f64 = 1e-6;

/// A uniform periodic grid with `n` points per axis on [0, 2π)^m.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub m: usize,
    pub n: usize,
}

impl TorusGrid {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if !(1..=3).contains(&m) {
            return Err(Error::InvalidInput(format!("flow dimension must be 1, 2 or 3, got {m}")));
        }
        if n < 4 {
            return Err(Error::InvalidInput(format!("need at least 4 points per axis, got {n}")));
        }
        Ok(TorusGrid { m, n })
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.m as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n as f64
    }

    /// Default step 0.25·dx².
    pub fn default_dt(&self) -> f64 {
        0.25 * self.dx() * self.dx()
    }

    /// Multi-index of a node; axis 0 varies fastest.
    pub fn index_of(&self, node: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        let mut rest = node;
        for a in idx.iter_mut().take(self.m) {
            *a = rest % self.n;
            rest /= self.n;
        }
        idx
    }

    pub fn node_of(&self, idx: [usize; 3]) -> usize {
        (0..self.m).rev().fold(0, |acc, a| acc * self.n + idx[a])
    }

    /// Coordinates x ∈ [0, 2π)^m of a node (unused axes are 0).
    pub fn coords(&self, node: usize) -> [f64; 3] {
        let idx = self.index_of(node);
        let mut x = [0.0; 3];
        for a in 0..self.m {
            x[a] = idx[a] as f64 * self.dx();
        }
        x
    }

    /// Node reached by moving `shift[a]` steps along each axis (periodic).
    pub fn shifted(&self, node: usize, shift: [isize; 3]) -> usize {
        let mut idx = self.index_of(node);
        let n = self.n as isize;
        for a in 0..self.m {
            idx[a] = (idx[a] as isize + shift[a]).rem_euclid(n) as usize;
        }
        self.node_of(idx)
    }

    /// Samples f on the grid.
    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.coords(i))).collect()
    }
}

/// Centered-difference Hessian at a node, as a full 3×3 matrix (unused
/// axes zero).
pub fn hessian_at(grid: &TorusGrid, u: &[f64], node: usize) -> Matrix3<f64> {
    let h2 = grid.dx() * grid.dx();
    let mut hess = Matrix3::zeros();
    let at = |s: [isize; 3]| u[grid.shifted(node, s)];
    let c = u[node];
    for a in 0..grid.m {
        let mut e = [0isize; 3];
        e[a] = 1;
        let mut me = [0isize; 3];
        me[a] = -1;
        hess[(a, a)] = (at(e) - 2.0 * c + at(me)) / h2;
        for b in a + 1..grid.m {
            let mut pp = [0isize; 3];
            pp[a] = 1;
            pp[b] = 1;
            let mut pm = pp;
            pm[b] = -1;
            let mut mp = pp;
            mp[a] = -1;
            let mut mm = pm;
            mm[a] = -1;
            let v = (at(pp) - at(pm) - at(mp) + at(mm)) / (4.0 * h2);
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }
    hess
}

/// Eigenvalues of the leading m×m block of a symmetric Hessian:
/// closed form for m ≤ 2, Householder tridiagonalization + QL for m = 3.
pub fn hessian_eigenvalues(h: &Matrix3<f64>, m: usize) -> [f64; 3] {
    match m {
        1 => [h[(0, 0)], 0.0, 0.0],
        2 => {
            let (a, b, c) = (h[(0, 0)], h[(0, 1)], h[(1, 1)]);
            let mean = 0.5 * (a + c);
            let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            [mean - rad, mean + rad, 0.0]
        }
        _ => {
            let e = SymmetricEigen::new(*h).eigenvalues;
            [e[0], e[1], e[2]]
        }
    }
}

/// Per-node angle and det(I + Hess u).
fn angle_and_det(grid: &TorusGrid, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    crate::parallel::install(|| {
        (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let lam = hessian_eigenvalues(&hessian_at(grid, u, i), grid.m);
                let theta: f64 = lam[..grid.m].iter().map(|l| l.atan()).sum();
                let det: f64 = lam[..grid.m].iter().map(|l| 1.0 + l).product();
                (theta, det)
            })
            .unzip()
    })
}

fn graph_violations(det: &[f64]) -> (Vec<usize>, f64) {
    let min_det = det.iter().copied().fold(f64::INFINITY, f64::min);
    let bad = det.iter().enumerate().filter(|(_, d)| **d < GRAPH_DET_MIN).map(|(i, _)| i).collect();
    (bad, min_det)
}

/// θ = Σ arctan λᵢ(Hess u) at every node.
///
/// Fails when det(I + Hess u) < 1e-6 somewhere: the graph has left the
/// component of the zero section.
pub fn lagrangian_angle(grid: &TorusGrid, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != grid.len() {
        return Err(Error::InvalidInput(format!("field has {} values, grid has {}", u.len(), grid.len())));
    }
    let (theta, det) = angle_and_det(grid, u);
    let (bad, min_det) = graph_violations(&det);
    if !bad.is_empty() {
        return Err(Error::GraphCondition { nodes: bad, min_det });
    }
    Ok(theta)
}

/// Discrete Laplacian (trace of the centered-difference Hessian).
pub fn laplacian(grid: &TorusGrid, u: &[f64]) -> Vec<f64> {
    let h2 = grid.dx() * grid.dx();
    (0..grid.len())
        .map(|i| {
            let mut s = 0.0;
            for a in 0..grid.m {
                let mut e = [0isize; 3];
                e[a] = 1;
                let mut me = [0isize; 3];
                me[a] = -1;
                s += (u[grid.shifted(i, e)] - 2.0 * u[i] + u[grid.shifted(i, me)]) / h2;
            }
            s
        })
        .collect()
}

/// The potential u at time t with its angle field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub grid: TorusGrid,
    pub u: Vec<f64>,
    pub t: f64,
    pub theta: Vec<f64>,
}

impl FlowState {
    pub fn new(grid: TorusGrid, u: Vec<f64>) -> Result<Self> {
        let theta = lagrangian_angle(&grid, &u)?;
        Ok(FlowState { grid, u, t: 0.0, theta })
    }

    pub fn sup_theta(&self) -> f64 {
        self.theta.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn amplitude(&self) -> f64 {
        self.u.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// max |stored θ − θ recomputed from u|.
    pub fn theta_consistency(&self) -> Result<f64> {
        let fresh = lagrangian_angle(&self.grid, &self.u)?;
        Ok(fresh.iter().zip(&self.theta).fold(0.0, |a, (x, y)| a.max((x - y).abs())))
    }
}

/// Which right-hand side the stepper integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Model {
    Nonlinear,
    Heat,
}

fn step_with(state: &FlowState, dt: f64, solver: &HeatSolver, model: Model) -> Result<FlowState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    let grid = state.grid;
    let rhs: Vec<f64> = match model {
        Model::Nonlinear => {
            let lap = laplacian(&grid, &state.u);
            state.u.iter().zip(&state.theta).zip(&lap).map(|((u, th), l)| u + dt * (th - l)).collect()
        }
        Model::Heat => state.u.clone(),
    };
    let u = solver.solve(&rhs, dt);
    let (theta, det) = angle_and_det(&grid, &u);
    let (bad, _) = graph_violations(&det);
    if !bad.is_empty() {
        return Err(Error::StepRejected { suggested_dt: dt / 2.0, nodes: bad });
    }
    Ok(FlowState { grid, u, t: state.t + dt, theta })
}

/// One semi-implicit step: u⁺ = Πₐ(I − dt·Δₐ)⁻¹ (u + dt·(θ(u) − Δu)), the
/// factored form of (I − dt·Δ)u⁺ = u + dt·(θ(u) − Δu).
///
/// Rejected with a suggested dt/2 if the new graph violates the graph
/// condition.
pub fn flow_step(state: &FlowState, dt: f64) -> Result<FlowState> {
    let solver = HeatSolver::new(state.grid);
    step_with(state, dt, &solver, Model::Nonlinear)
}

/// Result of integrating to a final time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowRun {
    pub state: FlowState,
    /// Time after each accepted step, starting with the initial time.
    pub times: Vec<f64>,
    /// sup|θ| after each accepted step, starting with the initial value.
    pub sup_theta: Vec<f64>,
    /// sup|u| after each accepted step, starting with the initial value.
    pub amplitude: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    /// Snapshots at the requested output times (the first step ending at or
    /// after each).
    pub snapshots: Vec<FlowState>,
}

/// Smallest step tried before giving up on a rejected step.
const MIN_DT_FRACTION: f64 = 1e-6;

fn evolve_model(initial: &FlowState, t_end: f64, dt: f64, outputs: &[f64], model: Model) -> Result<FlowRun> {
    if !(t_end >= initial.t) {
        return Err(Error::InvalidInput(format!("final time {t_end} precedes the initial time {}", initial.t)));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    let solver = HeatSolver::new(initial.grid);
    let mut state = initial.clone();
    let mut run = FlowRun {
        state: initial.clone(),
        times: vec![state.t],
        sup_theta: vec![state.sup_theta()],
        amplitude: vec![state.amplitude()],
        accepted: 0,
        rejected: 0,
        snapshots: Vec::new(),
    };
    let mut pending: Vec<f64> = outputs.to_vec();
    pending.sort_by(f64::total_cmp);
    pending.reverse();
    while pending.last().is_some_and(|t| *t <= state.t) {
        pending.pop();
        run.snapshots.push(state.clone());
    }
    let eps = 1e-12 * t_end.max(1.0);
    while state.t < t_end - eps {
        let mut h = dt.min(t_end - state.t);
        loop {
            match step_with(&state, h, &solver, model) {
                Ok(next) => {
                    state = next;
                    break;
                }
                Err(Error::StepRejected { suggested_dt, nodes }) => {
                    run.rejected += 1;
                    if suggested_dt < dt * MIN_DT_FRACTION {
                        let (_, det) = angle_and_det(&state.grid, &solver.solve(&state.u, suggested_dt));
                        let min_det = nodes.iter().map(|i| det[*i]).fold(f64::INFINITY, f64::min);
                        return Err(Error::GraphCondition { nodes, min_det });
                    }
                    h = suggested_dt;
                }
                Err(e) => return Err(e),
            }
        }
        run.accepted += 1;
        run.times.push(state.t);
        run.sup_theta.push(state.sup_theta());
        run.amplitude.push(state.amplitude());
        while pending.last().is_some_and(|t| *t <= state.t + eps) {
            pending.pop();
            run.snapshots.push(state.clone());
        }
    }
    run.state = state;
    Ok(run)
}

/// Integrates the flow to `t_end` with step `dt`, halving a step whenever
/// it is rejected.
pub fn evolve(initial: &FlowState, t_end: f64, dt: f64, outputs: &[f64]) -> Result<FlowRun> {
    evolve_model(initial, t_end, dt, outputs, Model::Nonlinear)
}

/// The linearized flow ∂ₜu = Δu with the same implicit stepping.
pub fn evolve_heat(initial: &FlowState, t_end: f64, dt: f64) -> Result<FlowRun> {
    evolve_model(initial, t_end, dt, &[], Model::Heat)
}

/// Nonlinear flow versus linearized flow started from ε·u0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub epsilons: Vec<f64>,
    /// max-norm difference d(ε) at the final time.
    pub defects: Vec<f64>,
    /// d(εᵢ₊₁)/d(εᵢ).
    pub ratios: Vec<f64>,
}

/// For each ε, runs the nonlinear flow and the heat flow of ε·u0 to time
/// `t_end` with identical stepping, and records sup|u_flow − u_heat|.
pub fn linearization_defect(
    grid: TorusGrid,
    u0: &[f64],
    epsilons: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<DefectReport> {
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidInput("epsilons must be positive".into()));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("epsilons must be strictly decreasing".into()));
    }
    let mut defects = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let scaled: Vec<f64> = u0.iter().map(|v| eps * v).collect();
        let start = FlowState::new(grid, scaled)?;
        let flow = evolve(&start, t_end, dt, &[])?;
        let heat = evolve_heat(&start, t_end, dt)?;
        let d = flow.state.u.iter().zip(&heat.state.u).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        defects.push(d);
    }
    let ratios = defects.windows(2).map(|w| if w[0] == 0.0 { 0.0 } else { w[1] / w[0] }).collect();
    Ok(DefectReport { epsilons: epsilons.to_vec(), defects, ratios })
}
