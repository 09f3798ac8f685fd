//! Flat tori: the spectrum of −Δ_h is { kᵀH⁻¹k : k ∈ ℤ^d } for period-2π
//! angle coordinates with constant metric H.

use nalgebra::DMatrix;

use super::{cluster, BasisTag, Spectrum};
use crate::error::{Error, Result};

pub(crate) fn check_metric(metric: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = metric.len();
    if d == 0 {
        return Err(Error::InvalidInput("torus metric must be at least 1x1".into()));
    }
    if metric.iter().any(|row| row.len() != d) {
        return Err(Error::InvalidInput("torus metric must be square".into()));
    }
    let h = DMatrix::from_fn(d, d, |i, j| metric[i][j]);
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("torus metric has non-finite entries".into()));
    }
    let scale = h.amax().max(f64::MIN_POSITIVE);
    for i in 0..d {
        for j in 0..i {
            if (h[(i, j)] - h[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidInput("torus metric is not symmetric".into()));
            }
        }
    }
    let min_eig = h.clone().symmetric_eigenvalues().min();
    if !(min_eig > 0.0) {
        return Err(Error::InvalidInput(format!(
            "torus metric is not positive definite (smallest eigenvalue {min_eig:e})"
        )));
    }
    Ok(h)
}

/// Every k ∈ ℤ^d with kᵀ Q k ≤ bound, together with that value.
///
/// The box |k_i| ≤ sqrt(bound · (Q⁻¹)_ii) contains the whole ellipsoid.
pub(crate) fn lattice_points(q: &DMatrix<f64>, q_inv: &DMatrix<f64>, bound: f64) -> Vec<(f64, Vec<i64>)> {
    let d = q.nrows();
    let radii: Vec<i64> =
        (0..d).map(|i| ((bound * q_inv[(i, i)]).max(0.0).sqrt() * (1.0 + 1e-12)).floor() as i64).collect();
    let mut out = Vec::new();
    let mut k = vec![0i64; d];
    fn recurse(
        axis: usize,
        k: &mut Vec<i64>,
        radii: &[i64],
        q: &DMatrix<f64>,
        bound: f64,
        out: &mut Vec<(f64, Vec<i64>)>,
    ) {
        if axis == k.len() {
            let mut v = 0.0;
            for i in 0..k.len() {
                for j in 0..k.len() {
                    v += k[i] as f64 * q[(i, j)] * k[j] as f64;
                }
            }
            if v <= bound * (1.0 + 1e-12) + 1e-12 {
                out.push((v.max(0.0), k.clone()));
            }
            return;
        }
        for c in -radii[axis]..=radii[axis] {
            k[axis] = c;
            recurse(axis + 1, k, radii, q, bound, out);
        }
    }
    recurse(0, &mut k, &radii, q, bound, &mut out);
    out
}

pub(crate) fn torus_spectrum(metric: &[Vec<f64>], lambda_max: f64) -> Result<Spectrum> {
    let h = check_metric(metric)?;
    let h_inv = h.clone().try_inverse().ok_or_else(|| Error::InvalidInput("torus metric is singular".into()))?;
    let mut pts = lattice_points(&h_inv, &h, lambda_max);
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let tol = 1e-9;
    let entries = cluster(pts, tol, BasisTag::Lattice);
    Ok(Spectrum { lambda_max, entries, tol })
}
