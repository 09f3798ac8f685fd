//! Discrete asymptotics of radial profiles: fit c·r^{α+2k} terms below a
//! weight γ and measure how fast the remainder decays.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ModeSolution;
use crate::error::{Error, Result};
use crate::link_spectrum::{alpha_roots, ExponentTable};
use crate::weighted_norms::{decay_rate, dyadic_suprema, smooth_cutoff, RadiusFunction};

/// c·r^{α+2k}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticTerm {
    pub alpha: f64,
    pub k: usize,
    pub coefficient: f64,
}

impl AsymptoticTerm {
    pub fn exponent(&self) -> f64 {
        self.alpha + 2.0 * self.k as f64
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.coefficient * r.powf(self.exponent())
    }
}

/// The fitted model-space part of a profile at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticExpansion {
    pub time: f64,
    pub gamma: f64,
    pub terms: Vec<AsymptoticTerm>,
    /// Log–log slope of the remainder's annulus suprema; None when the
    /// remainder is at round-off level.
    pub remainder_rate: Option<f64>,
    pub remainder_std_err: Option<f64>,
    /// Largest |remainder| over the fit window.
    pub remainder_sup: f64,
    /// Exponent of the auxiliary power that absorbed the remainder during
    /// the fit.
    pub auxiliary_exponent: Option<f64>,
    pub warnings: Vec<String>,
}

impl AsymptoticExpansion {
    pub fn eval(&self, r: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(r)).sum()
    }

    pub fn coefficient(&self, alpha: f64, k: usize) -> Option<f64> {
        self.terms.iter().find(|t| t.k == k && (t.alpha - alpha).abs() < 1e-9).map(|t| t.coefficient)
    }
}

/// Radial range [lo, hi] over which profiles are fitted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub lo: f64,
    pub hi: f64,
}

impl FitWindow {
    /// [R/2048, R/8]: eight dyadic annuli inside the inner eighth of the cone.
    pub fn for_radius(radius: f64) -> Self {
        FitWindow { lo: radius / 2048.0, hi: radius / 8.0 }
    }
}

const ILL_CONDITIONED_GAP: f64 = 0.05;

/// Weighted least squares of `u` on r^{e} columns (weights r^{−γ}).
/// Returns coefficients and the weighted residual norm.
fn weighted_ls(r: &[f64], u: &[f64], exps: &[f64], gamma: f64) -> (Vec<f64>, f64) {
    let rows = r.len();
    let cols = exps.len();
    let w: Vec<f64> = r.iter().map(|x| x.powf(-gamma)).collect();
    let b = DVector::from_iterator(rows, u.iter().zip(&w).map(|(v, w)| v * w));
    if cols == 0 {
        return (Vec::new(), b.norm());
    }
    let mut a = DMatrix::from_fn(rows, cols, |i, j| r[i].powf(exps[j]) * w[i]);
    let scale: Vec<f64> = (0..cols).map(|j| a.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    for (j, s) in scale.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-13).expect("U and V were computed");
    let resid = (&a * &x - &b).norm();
    ((0..cols).map(|j| x[j] / scale[j]).collect(), resid)
}

/// Fits `u` on the basis terms plus one auxiliary power r^ν chosen by
/// variable projection. Returns (term coefficients, ν if used).
fn project_with_auxiliary(r: &[f64], u: &[f64], exps: &[f64], gamma: f64) -> (Vec<f64>, Option<f64>) {
    let emax = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = (gamma - 1.0).max(emax + 0.1);
    let hi = gamma + 2.0;
    let cost = |nu: f64| {
        let mut e = exps.to_vec();
        e.push(nu);
        weighted_ls(r, u, &e, gamma).1
    };
    let n_grid = 48;
    let mut best = (lo, cost(lo));
    for i in 1..=n_grid {
        let nu = lo + (hi - lo) * i as f64 / n_grid as f64;
        let c = cost(nu);
        if c < best.1 {
            best = (nu, c);
        }
    }
    // Golden-section refinement around the best grid point.
    let h = (hi - lo) / n_grid as f64;
    let (mut a, mut b) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    for _ in 0..60 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = cost(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = cost(x2);
        }
    }
    let nu = if f1 < f2 { x1 } else { x2 };
    let nu = if cost(nu) <= best.1 { nu } else { best.0 };
    let mut e = exps.to_vec();
    e.push(nu);
    let (coef, _) = weighted_ls(r, u, &e, gamma);
    (coef[..exps.len()].to_vec(), Some(nu))
}

/// Fits a single radial profile against c·r^{α+2k} for the listed
/// (α, k) pairs and measures the remainder's decay over `window`.
pub fn fit_profile(
    r: &[f64],
    u: &[f64],
    basis: &[(f64, usize)],
    gamma: f64,
    window: FitWindow,
    time: f64,
) -> Result<AsymptoticExpansion> {
    if r.len() != u.len() {
        return Err(Error::InvalidInput("radii and values differ in length".into()));
    }
    if !(window.lo > 0.0 && window.hi > window.lo) {
        return Err(Error::InvalidInput(format!("bad fit window [{}, {}]", window.lo, window.hi)));
    }
    let mut warnings = Vec::new();
    let exps: Vec<f64> = basis.iter().map(|(a, k)| a + 2.0 * *k as f64).collect();
    if let Some(e) = exps.iter().find(|e| **e >= gamma) {
        return Err(Error::InvalidInput(format!("basis exponent {e} is not below gamma = {gamma}")));
    }
    for i in 0..exps.len() {
        for j in i + 1..exps.len() {
            if (exps[i] - exps[j]).abs() < ILL_CONDITIONED_GAP {
                warnings.push(format!(
                    "ill-conditioned fit: basis exponents {} and {} are closer than {ILL_CONDITIONED_GAP}",
                    exps[i], exps[j]
                ));
            }
        }
    }
    let (rw, uw): (Vec<f64>, Vec<f64>) = r
        .iter()
        .zip(u)
        .filter(|(x, _)| **x >= window.lo * (1.0 - 1e-12) && **x <= window.hi * (1.0 + 1e-12))
        .map(|(x, v)| (*x, *v))
        .unzip();
    if rw.len() < exps.len() + 3 {
        return Err(Error::InvalidInput(format!(
            "only {} nodes in the fit window [{}, {}]",
            rw.len(),
            window.lo,
            window.hi
        )));
    }
    let (coef, aux) = project_with_auxiliary(&rw, &uw, &exps, gamma);
    let terms: Vec<AsymptoticTerm> = basis
        .iter()
        .zip(&coef)
        .map(|((alpha, k), c)| AsymptoticTerm { alpha: *alpha, k: *k, coefficient: *c })
        .collect();
    let remainder: Vec<f64> =
        rw.iter().zip(&uw).map(|(x, v)| v - terms.iter().map(|t| t.eval(*x)).sum::<f64>()).collect();
    let remainder_sup = remainder.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let scale = uw.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let (mut rate, mut err) = (None, None);
    if remainder_sup > 1e-11 * scale && remainder_sup > 0.0 {
        let (radii, sups) = dyadic_suprema(&rw, &remainder, window.lo, window.hi);
        let fit = decay_rate(&radii, &sups)?;
        rate = Some(fit.rate);
        err = Some(fit.std_err);
    }
    Ok(AsymptoticExpansion {
        time,
        gamma,
        terms,
        remainder_rate: rate,
        remainder_std_err: err,
        remainder_sup,
        auxiliary_exponent: aux,
        warnings,
    })
}

/// Basis (α₊(λ), k) with α₊ + 2k < γ for one link mode, after checking
/// that α₊ belongs to the table and γ is not exceptional.
fn mode_basis(table: &ExponentTable, lambda: f64, m: usize, gamma: f64) -> Result<Vec<(f64, usize)>> {
    if table.m != m {
        return Err(Error::InvalidInput(format!("exponent table is for m = {}, solution for m = {m}", table.m)));
    }
    if gamma > table.window.1 {
        return Err(Error::WindowTooSmall {
            need_lo: 0.0,
            need_hi: gamma,
            have_lo: table.window.0,
            have_hi: table.window.1,
        });
    }
    let d = table.distance_to_e(gamma)?;
    if d <= table.tol {
        return Err(Error::ExceptionalWeight { components: vec![(0, gamma, gamma)] });
    }
    let alpha = alpha_roots(lambda, m).1;
    let mut basis = Vec::new();
    if alpha < gamma {
        if table.multiplicity(alpha) == 0 {
            return Err(Error::InvalidInput(format!(
                "mode eigenvalue {lambda} gives exponent {alpha}, which is not in the link's exponent set"
            )));
        }
        let mut k = 0;
        while alpha + 2.0 * (k as f64) < gamma {
            basis.push((alpha, k));
            k += 1;
        }
    }
    Ok(basis)
}

/// Discrete asymptotics of a mode solution at every time t > 0.
pub fn extract_asymptotics(
    sol: &ModeSolution,
    table: &ExponentTable,
    gamma: f64,
    window: FitWindow,
) -> Result<Vec<AsymptoticExpansion>> {
    let basis = mode_basis(table, sol.lambda, sol.m, gamma)?;
    crate::parallel::install(|| {
        (1..sol.times.len())
            .into_par_iter()
            .map(|i| fit_profile(&sol.nodes, &sol.values[i], &basis, gamma, window, sol.times[i]))
            .collect()
    })
}

/// Discrete asymptotics of a mode solution at the final time.
pub fn extract_final(
    sol: &ModeSolution,
    table: &ExponentTable,
    gamma: f64,
    window: FitWindow,
) -> Result<AsymptoticExpansion> {
    let basis = mode_basis(table, sol.lambda, sol.m, gamma)?;
    let last = sol.times.len() - 1;
    fit_profile(&sol.nodes, &sol.values[last], &basis, gamma, window, sol.times[last])
}

/// χ(ρ / cutoff)·v(ρ): a model-space element extended by a smooth cutoff
/// that is 1 on ρ < cutoff/2 and 0 on ρ > cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extension {
    pub terms: Vec<AsymptoticTerm>,
    pub cutoff: f64,
}

pub fn extend_asymptotic(terms: &[AsymptoticTerm], cutoff: f64) -> Result<Extension> {
    if !(cutoff > 0.0) || !cutoff.is_finite() {
        return Err(Error::InvalidInput(format!("cutoff radius must be positive, got {cutoff}")));
    }
    Ok(Extension { terms: terms.to_vec(), cutoff })
}

impl Extension {
    pub fn eval(&self, rho: f64) -> f64 {
        let chi = smooth_cutoff(rho / self.cutoff);
        if chi == 0.0 {
            return 0.0;
        }
        chi * self.terms.iter().map(|t| t.eval(rho)).sum::<f64>()
    }

    /// Evaluates at a point of the compactified manifold through ρ.
    pub fn eval_at(&self, rho: &RadiusFunction, x: &[f64]) -> f64 {
        self.eval(rho.eval(x).0)
    }
}
