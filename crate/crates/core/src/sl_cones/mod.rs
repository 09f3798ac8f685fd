//! Special Lagrangian cones, their moment-map harmonics and stability index.

mod cone;
mod moment;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link_spectrum::{ExponentTable, LinkSpec};

pub use cone::{ConeDescription, Embedding, SLCone, TrigTerm};
pub use moment::{moment_eval, moment_eval_complex, su_basis, translation_basis, verify_hamiltonian, MomentElement};

/// Result of pulling a moment map back to the cone.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Restriction {
    /// Homogeneity order α of μ_X(r σ) = r^α φ(σ).
    pub order: u8,
    pub samples: Vec<Vec<f64>>,
    /// φ at `samples`.
    pub values: Vec<f64>,
    /// α(α + m − 2): the eigenvalue of −Δ_h that φ must have.
    pub lambda: f64,
    /// ‖Δ_h φ + λ φ‖ / ‖φ‖ (0 for φ ≡ 0).
    pub harmonic_residual: f64,
    /// Fraction of ‖φ‖ outside the λ-eigenspace (torus links only).
    pub eigenspace_residual: Option<f64>,
    pub is_zero: bool,
}

/// φ(σ) = μ_X(embed(σ, 1)) with its homogeneity order and harmonicity check.
pub fn restrict_to_cone(cone: &SLCone, x: &MomentElement) -> Result<Restriction> {
    if x.dim() != cone.m {
        return Err(Error::InvalidInput(format!("moment element acts on C^{}, cone lives in C^{}", x.dim(), cone.m)));
    }
    let samples = cone.sample_points(8);
    let at = |sigma: &[f64], r: f64| moment_eval(x, &cone.embed(sigma, r));
    let values: Vec<f64> = samples.iter().map(|s| at(s, 1.0)).collect();
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let is_zero = scale <= 1e-13 * (1.0 + x.c.abs());

    let mut fitting = Vec::new();
    for order in 0u8..=2 {
        let p = 2f64.powi(order as i32);
        let worst = samples
            .iter()
            .zip(&values)
            .map(|(s, v)| (at(s, 2.0) - p * v).abs().max((at(s, 0.5) - v / p).abs()))
            .fold(0.0f64, f64::max);
        if worst <= 1e-8 * scale.max(1.0) {
            fitting.push(order);
        }
    }
    let order = match fitting.as_slice() {
        [] => {
            return Err(Error::MixedHomogeneity(format!(
                "A, v and c parts of X restrict with different orders on {}",
                cone.name
            )))
        }
        [o] => *o,
        // φ ≡ 0: every order fits, report the one the nonzero parts of X carry.
        _ if x.has_matrix_part() => 2,
        _ if x.has_translation_part() => 1,
        _ => 0,
    };
    let alpha = order as f64;
    let lambda = alpha * (alpha + cone.m as f64 - 2.0);
    let (harmonic_residual, eigenspace_residual) = if is_zero {
        (0.0, matches!(cone.link, LinkSpec::FlatTorus { .. }).then_some(0.0))
    } else {
        match (&cone.embedding, &cone.link) {
            (Embedding::Trig { coords }, LinkSpec::FlatTorus { metric }) => {
                let kmax = coords.iter().flatten().flat_map(|t| t.k.iter()).map(|k| k.abs()).max().unwrap_or(0);
                let (lap, proj) = torus_harmonic_residuals(cone, x, metric, lambda, kmax as usize)?;
                (lap, Some(proj))
            }
            (Embedding::RealSphere, _) => (sphere_harmonic_residual(cone, x, lambda, &samples), None),
            _ => return Err(Error::InvalidInput("embedding does not match the link type".into())),
        }
    };
    Ok(Restriction { order, samples, values, lambda, harmonic_residual, eigenspace_residual, is_zero })
}

/// Exact Fourier analysis of φ on a torus link: φ is a trigonometric
/// polynomial, so a DFT on a grid finer than twice its degree is exact.
fn torus_harmonic_residuals(
    cone: &SLCone,
    x: &MomentElement,
    metric: &[Vec<f64>],
    lambda: f64,
    kmax: usize,
) -> Result<(f64, f64)> {
    let d = cone.m - 1;
    let n = 4 * kmax.max(1) + 4;
    let total = n.pow(d as u32);
    let h = DMatrix::from_fn(d, d, |i, j| metric[i][j]);
    let h_inv = h.try_inverse().ok_or_else(|| Error::InvalidInput("singular link metric".into()))?;
    let index = |mut idx: usize| -> Vec<usize> {
        (0..d)
            .map(|_| {
                let i = idx % n;
                idx /= n;
                i
            })
            .collect()
    };
    let grid: Vec<f64> = (0..total)
        .map(|g| {
            let phi: Vec<f64> = index(g).iter().map(|&i| 2.0 * std::f64::consts::PI * i as f64 / n as f64).collect();
            moment_eval(x, &cone.embed(&phi, 1.0))
        })
        .collect();
    let (mut energy, mut off_energy, mut lap_energy) = (0.0, 0.0, 0.0);
    for f in 0..total {
        // signed frequencies in (−n/2, n/2]
        let k: Vec<f64> = index(f).iter().map(|&i| if i > n / 2 { i as f64 - n as f64 } else { i as f64 }).collect();
        let mut coef = Complex64::new(0.0, 0.0);
        for (g, val) in grid.iter().enumerate() {
            let phase: f64 =
                index(g).iter().zip(&k).map(|(&i, kk)| -2.0 * std::f64::consts::PI * kk * i as f64 / n as f64).sum();
            coef += Complex64::from_polar(*val, phase);
        }
        let e = (coef / total as f64).norm_sqr();
        let kv = nalgebra::DVector::from_vec(k);
        let ev = (kv.transpose() * &h_inv * &kv)[(0, 0)];
        energy += e;
        lap_energy += e * (ev - lambda).powi(2);
        if (ev - lambda).abs() > 1e-9 * lambda.max(1.0) {
            off_energy += e;
        }
    }
    Ok(((lap_energy / energy).sqrt(), (off_energy / energy).sqrt()))
}

/// Δ_S φ through the 0-homogeneous extension F(x) = φ(x/|x|), whose flat
/// Laplacian on the unit sphere is the spherical one; 4th-order differences.
fn sphere_harmonic_residual(cone: &SLCone, x: &MomentElement, lambda: f64, samples: &[Vec<f64>]) -> f64 {
    let m = cone.m;
    let f = |p: &[f64]| {
        let n = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        let unit: Vec<f64> = p.iter().map(|v| v / n).collect();
        moment_eval(x, &cone.embed(&unit, 1.0))
    };
    let h = 1e-3;
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for s in samples {
        let phi = f(s);
        let mut lap = 0.0;
        for i in 0..m {
            let shifted = |t: f64| {
                let mut p = s.clone();
                p[i] += t;
                f(&p)
            };
            lap += (-shifted(2.0 * h) + 16.0 * shifted(h) - 30.0 * phi + 16.0 * shifted(-h) - shifted(-2.0 * h))
                / (12.0 * h * h);
        }
        worst = worst.max((lap + lambda * phi).abs());
        scale = scale.max(phi.abs());
    }
    worst / scale
}

/// Numerical rank of {σ ↦ μ_X(σ)} over a basis of X, via singular values.
pub fn restriction_rank(cone: &SLCone, basis: &[MomentElement]) -> usize {
    let samples = cone.sample_points(12);
    let mat =
        DMatrix::from_fn(basis.len(), samples.len(), |b, s| moment_eval(&basis[b], &cone.embed(&samples[s], 1.0)));
    let sv = mat.singular_values();
    let top = sv.max();
    sv.iter().filter(|&&s| s > 1e-8 * top.max(1e-300)).count()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityReport {
    pub cone: String,
    pub m: usize,
    pub dim_g: usize,
    pub index: i64,
    /// Σ m_Σ(α) over α ∈ D_Σ ∩ [0, 2].
    pub harmonic_count: i64,
    /// (α, m_Σ(α)) for α ∈ D_Σ ∩ [0, 2].
    pub harmonic_counts: Vec<(f64, usize)>,
    pub rank_translations: usize,
    pub rank_su: usize,
    pub bound_translations: usize,
    pub bound_su: i64,
    pub warnings: Vec<String>,
}

/// ind(C) = M⁺_Σ(2) − m² − 2m + dim G, with the closed count at α = 2.
pub fn stability_index(cone: &SLCone, table: &ExponentTable) -> Result<StabilityReport> {
    if table.m != cone.m {
        return Err(Error::InvalidInput(format!("exponent table is for m = {}, cone has m = {}", table.m, cone.m)));
    }
    let m = cone.m as i64;
    let harmonic_count = table.count_m_closed(2.0)?;
    let index = harmonic_count - m * m - 2 * m + cone.dim_g as i64;
    let harmonic_counts: Vec<(f64, usize)> = table
        .entries
        .iter()
        .filter(|e| e.alpha >= -table.tol && e.alpha <= 2.0 + table.tol)
        .map(|e| (e.alpha, e.multiplicity))
        .collect();
    let rank_translations = restriction_rank(cone, &translation_basis(cone.m));
    let rank_su = restriction_rank(cone, &su_basis(cone.m));
    let bound_translations = 2 * cone.m;
    let bound_su = m * m - 1 - cone.dim_g as i64;
    let mut warnings = Vec::new();
    if rank_translations < bound_translations {
        warnings.push(format!(
            "translation moment maps restrict to a space of rank {rank_translations} < 2m = {bound_translations}: restriction is not injective"
        ));
    }
    if (rank_su as i64) < bound_su {
        warnings
            .push(format!("su(m) moment maps restrict to a space of rank {rank_su} < m^2 - 1 - dim G = {bound_su}"));
    }
    if index < 0 {
        warnings.push(format!("negative stability index {index}: cone is degenerate for this count"));
    }
    Ok(StabilityReport {
        cone: cone.name.clone(),
        m: cone.m,
        dim_g: cone.dim_g,
        index,
        harmonic_count,
        harmonic_counts,
        rank_translations,
        rank_su,
        bound_translations,
        bound_su,
        warnings,
    })
}

/// Exponent table of a cone's link covering at least [lo, hi].
pub fn cone_table(cone: &SLCone, lo: f64, hi: f64) -> Result<ExponentTable> {
    let top = lo.abs().max(hi.abs()) + 1.0;
    let lambda_max = top * (top + cone.m as f64 - 2.0);
    let spec = crate::link_spectrum::eigenvalues(&cone.link, lambda_max)?;
    crate::link_spectrum::exponents(&spec, cone.m, (lo, hi))
}
