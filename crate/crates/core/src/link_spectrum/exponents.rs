use serde::{Deserialize, Serialize};

use super::Spectrum;
use crate::error::{Error, Result};

/// Default tolerance for "γ is an exponent" on analytic links.
pub const ANALYTIC_TOL: f64 = 1e-9;
/// Default tolerance for "γ is an exponent" on mesh links.
pub const MESH_TOL: f64 = 1e-4;

/// Both roots of α(α + m − 2) = λ, as (α₋, α₊).
pub fn alpha_roots(lambda: f64, m: usize) -> (f64, f64) {
    let c = (m as f64 - 2.0) / 2.0;
    let s = (c * c + lambda.max(0.0)).sqrt();
    (-c - s, -c + s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentEntry {
    pub alpha: f64,
    pub multiplicity: usize,
    /// Eigenvalue of −Δ_h this exponent came from.
    pub lambda: f64,
}

/// The exponent set D_Σ restricted to a window, with multiplicities m_Σ.
///
/// `window` is the interval the table can vouch for: the requested window
/// intersected with the exponent range reachable from the spectrum's
/// `lambda_max`. Counting functions refuse to look outside it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentTable {
    pub m: usize,
    pub window: (f64, f64),
    pub entries: Vec<ExponentEntry>,
    pub tol: f64,
}

/// Builds the exponent table of a spectrum for a cone of dimension `m`.
pub fn exponents(spectrum: &Spectrum, m: usize, window: (f64, f64)) -> Result<ExponentTable> {
    if m < 3 {
        return Err(Error::InvalidInput(format!("cone dimension m must be >= 3, got {m}")));
    }
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidInput(format!("bad exponent window [{lo}, {hi}]")));
    }
    let mut entries = Vec::new();
    for e in spectrum.iter() {
        let (minus, plus) = alpha_roots(e.lambda, m);
        for alpha in [minus, plus] {
            if alpha >= lo && alpha <= hi {
                entries.push(ExponentEntry { alpha, multiplicity: e.multiplicity, lambda: e.lambda });
            }
        }
    }
    entries.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    // Exponents beyond the roots of lambda_max may exist but are not listed.
    let (reach_lo, reach_hi) = alpha_roots(spectrum.lambda_max, m);
    let tol = if spectrum.tol > 1e-8 { MESH_TOL } else { ANALYTIC_TOL };
    Ok(ExponentTable { m, window: (lo.max(reach_lo), hi.min(reach_hi)), entries, tol })
}

impl ExponentTable {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn require(&self, lo: f64, hi: f64) -> Result<()> {
        let (wl, wh) = self.window;
        if lo < wl - self.tol || hi > wh + self.tol {
            return Err(Error::WindowTooSmall { need_lo: lo, need_hi: hi, have_lo: wl, have_hi: wh });
        }
        Ok(())
    }

    /// m_Σ(α): multiplicity of α as an exponent, 0 when α ∉ D_Σ.
    pub fn multiplicity(&self, alpha: f64) -> usize {
        self.entries.iter().filter(|e| (e.alpha - alpha).abs() <= self.tol).map(|e| e.multiplicity).sum()
    }

    /// Exponent of D_Σ nearest to `gamma`, if any lies in the table.
    pub fn nearest_exponent(&self, gamma: f64) -> Option<f64> {
        self.entries.iter().map(|e| e.alpha).min_by(|a, b| (a - gamma).abs().total_cmp(&(b - gamma).abs()))
    }

    pub fn is_exceptional(&self, gamma: f64) -> bool {
        self.multiplicity(gamma) > 0
    }

    /// M_Σ(δ) with the half-open conventions (δ, 0) and [0, δ).
    pub fn count_m(&self, delta: f64) -> Result<i64> {
        self.require(delta.min(0.0), delta.max(0.0))?;
        let tol = self.tol;
        let total: usize = if delta < 0.0 {
            self.entries.iter().filter(|e| e.alpha > delta + tol && e.alpha < -tol).map(|e| e.multiplicity).sum()
        } else {
            self.entries.iter().filter(|e| e.alpha >= -tol && e.alpha < delta - tol).map(|e| e.multiplicity).sum()
        };
        Ok(if delta < 0.0 { -(total as i64) } else { total as i64 })
    }

    /// Σ m_Σ(α) over α ∈ D_Σ ∩ [0, δ], the closed count used by the stability index.
    pub fn count_m_closed(&self, delta: f64) -> Result<i64> {
        if delta < 0.0 {
            return Err(Error::InvalidInput("closed count needs delta >= 0".into()));
        }
        self.require(0.0, delta)?;
        let tol = self.tol;
        Ok(self
            .entries
            .iter()
            .filter(|e| e.alpha >= -tol && e.alpha <= delta + tol)
            .map(|e| e.multiplicity as i64)
            .sum())
    }

    /// n_Σ(β) = m_Σ(β) + Σ_{k ≥ 1, 2k ≤ β} m_Σ(β − 2k).
    pub fn count_n_beta(&self, beta: f64) -> Result<usize> {
        self.require(beta.min(0.0), beta.max(0.0))?;
        let mut n = self.multiplicity(beta);
        let mut k = 1;
        while 2.0 * k as f64 <= beta + self.tol {
            n += self.multiplicity(beta - 2.0 * k as f64);
            k += 1;
        }
        Ok(n)
    }

    /// E_Σ ∩ [lo, hi): exponents of D_Σ together with the lifts α + 2k,
    /// k ≥ 1, of the non-negative ones. Values within tolerance are merged.
    pub fn e_set(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        self.require(lo.min(0.0), hi.max(0.0))?;
        let tol = self.tol;
        let mut out: Vec<f64> = Vec::new();
        for e in &self.entries {
            let mut beta = e.alpha;
            loop {
                if beta >= hi - tol {
                    break;
                }
                if beta >= lo - tol {
                    out.push(beta);
                }
                if e.alpha < -tol {
                    break;
                }
                beta += 2.0;
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= tol);
        Ok(out)
    }

    /// Distance from γ to E_Σ (∞ when the table lists no nearby element).
    pub fn distance_to_e(&self, gamma: f64) -> Result<f64> {
        let reach = 1.0;
        let lo = (gamma - reach).max(self.window.0);
        let hi = (gamma + reach).min(self.window.1);
        let set = self.e_set(lo, hi + self.tol * 2.0)?;
        Ok(set.iter().map(|b| (b - gamma).abs()).fold(f64::INFINITY, f64::min))
    }

    /// N_Σ(δ). For δ < 0 this sums n_Σ over D_Σ ∩ (δ, 0), which equals
    /// −M_Σ(δ). For δ ≥ 0 it sums n_Σ over E_Σ ∩ [0, δ), so that it equals
    /// the dimension of the model space and M(δ) = N(δ) − N(δ − 2) for δ > 2.
    pub fn count_n(&self, delta: f64) -> Result<i64> {
        if delta < 0.0 {
            return self.count_m(delta);
        }
        let mut total = 0i64;
        for beta in self.e_set(0.0, delta)? {
            if beta < -self.tol {
                continue;
            }
            total += self.count_n_beta(beta)? as i64;
        }
        Ok(total)
    }

    /// Positive exponent attached to an eigenvalue, if present in the table.
    pub fn alpha_plus_of(&self, lambda: f64) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| (e.lambda - lambda).abs() <= 1e-9 * lambda.abs().max(1.0) + self.tol)
            .map(|e| e.alpha)
            .find(|a| *a >= -self.tol)
    }
}
