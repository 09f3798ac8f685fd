use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link_spectrum::LinkSpec;

/// One term c·e^{i k·φ} of a coordinate of a torus-link embedding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub re: f64,
    pub im: f64,
    pub k: Vec<i64>,
}

/// How the link sits in the unit sphere of ℂ^m.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Embedding {
    /// A torus link: coordinate j is Σ_t c_t e^{i k_t·φ}, φ ∈ [0, 2π)^{m−1}.
    Trig { coords: Vec<Vec<TrigTerm>> },
    /// The real unit sphere S^{m−1} ⊂ ℝ^m ⊂ ℂ^m. Link points are unit vectors.
    RealSphere,
}

/// A cone C = {r·σ : σ ∈ Σ, r ≥ 0} in ℂ^m.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SLCone {
    pub name: String,
    pub m: usize,
    pub link: LinkSpec,
    pub embedding: Embedding,
    pub phase_theta: f64,
    /// Dimension of the largest subgroup of SU(m) preserving the cone.
    pub dim_g: usize,
}

/// The JSON form of a user-supplied cone. The link metric and the phase
/// are derived from the embedding when absent.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConeDescription {
    pub name: String,
    pub m: usize,
    pub embedding: Embedding,
    pub dim_g: usize,
    #[serde(default)]
    pub phase_theta: Option<f64>,
}

impl Embedding {
    /// The point σ ∈ Σ ⊂ S^{2m−1} for link coordinates `sigma`.
    pub fn eval(&self, sigma: &[f64]) -> Vec<Complex64> {
        match self {
            Embedding::Trig { coords } => coords
                .iter()
                .map(|terms| {
                    terms
                        .iter()
                        .map(|t| {
                            let phase: f64 = t.k.iter().zip(sigma).map(|(k, p)| *k as f64 * p).sum();
                            Complex64::new(t.re, t.im) * Complex64::from_polar(1.0, phase)
                        })
                        .sum()
                })
                .collect(),
            Embedding::RealSphere => sigma.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    /// Tangent vectors of the link at σ, as vectors in ℂ^m.
    pub fn tangent_frame(&self, sigma: &[f64], m: usize) -> Vec<Vec<Complex64>> {
        match self {
            Embedding::Trig { coords } => (0..m - 1)
                .map(|l| {
                    coords
                        .iter()
                        .map(|terms| {
                            terms
                                .iter()
                                .map(|t| {
                                    let phase: f64 = t.k.iter().zip(sigma).map(|(k, p)| *k as f64 * p).sum();
                                    Complex64::new(t.re, t.im)
                                        * Complex64::new(0.0, t.k[l] as f64)
                                        * Complex64::from_polar(1.0, phase)
                                })
                                .sum()
                        })
                        .collect()
                })
                .collect(),
            Embedding::RealSphere => {
                // Gram–Schmidt on e_i − (x·e_i)x, dropping the most parallel axis.
                let x = DVector::from_column_slice(sigma);
                let drop = x.iamax();
                let mut frame: Vec<DVector<f64>> = Vec::new();
                for i in (0..m).filter(|&i| i != drop) {
                    let mut v = DVector::zeros(m);
                    v[i] = 1.0;
                    v -= &x * x[i];
                    for f in &frame {
                        let p = f.dot(&v);
                        v -= f * p;
                    }
                    frame.push(v.normalize());
                }
                frame.into_iter().map(|v| v.iter().map(|&c| Complex64::new(c, 0.0)).collect()).collect()
            }
        }
    }
}

fn herm_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl SLCone {
    /// Harvey–Lawson T² cone (e^{iφ₁}, e^{iφ₂}, e^{−i(φ₁+φ₂)}) r/√3 in ℂ³.
    pub fn harvey_lawson_torus() -> Self {
        let s = 1.0 / 3f64.sqrt();
        let term = |k: Vec<i64>| vec![TrigTerm { re: s, im: 0.0, k }];
        let desc = ConeDescription {
            name: "hl-torus-3".into(),
            m: 3,
            embedding: Embedding::Trig { coords: vec![term(vec![1, 0]), term(vec![0, 1]), term(vec![-1, -1])] },
            dim_g: 2,
            phase_theta: None,
        };
        Self::from_description(desc).expect("catalog cone is valid")
    }

    /// The plane ℝ^m ⊂ ℂ^m, stabilized by SO(m).
    pub fn plane(m: usize) -> Self {
        SLCone {
            name: format!("plane-{m}"),
            m,
            link: LinkSpec::round_sphere(m - 1),
            embedding: Embedding::RealSphere,
            phase_theta: 0.0,
            dim_g: m * (m - 1) / 2,
        }
    }

    pub fn catalog_names() -> &'static [&'static str] {
        &["hl-torus-3", "plane-3"]
    }

    pub fn from_catalog(name: &str) -> Result<Self> {
        match name {
            "hl-torus-3" => Ok(Self::harvey_lawson_torus()),
            "plane-3" => Ok(Self::plane(3)),
            other => Err(Error::InvalidInput(format!(
                "unknown cone '{other}' (known: {})",
                Self::catalog_names().join(", ")
            ))),
        }
    }

    /// Builds a cone from its JSON description, deriving the link and phase.
    pub fn from_description(desc: ConeDescription) -> Result<Self> {
        let m = desc.m;
        if m < 3 {
            return Err(Error::InvalidInput(format!("cone dimension must be >= 3, got {m}")));
        }
        let link = match &desc.embedding {
            Embedding::Trig { coords } => {
                if coords.len() != m {
                    return Err(Error::InvalidInput(format!(
                        "embedding has {} coordinates, expected {m}",
                        coords.len()
                    )));
                }
                if coords.iter().flatten().any(|t| t.k.len() != m - 1) {
                    return Err(Error::InvalidInput(format!("every frequency vector must have {} entries", m - 1)));
                }
                LinkSpec::flat_torus(induced_torus_metric(&desc.embedding, m)?)
            }
            Embedding::RealSphere => LinkSpec::round_sphere(m - 1),
        };
        let mut cone = SLCone {
            name: desc.name,
            m,
            link,
            embedding: desc.embedding,
            phase_theta: desc.phase_theta.unwrap_or(0.0),
            dim_g: desc.dim_g,
        };
        if desc.phase_theta.is_none() {
            let sigma = cone.sample_points(1).remove(0);
            cone.phase_theta = cone.holomorphic_volume(&sigma).arg();
        }
        cone.validate()?;
        Ok(cone)
    }

    pub fn embed(&self, sigma: &[f64], r: f64) -> Vec<Complex64> {
        self.embedding.eval(sigma).into_iter().map(|z| z * r).collect()
    }

    /// Ω′(∂_r, t_1, …, t_{m−1}) at r = 1.
    pub fn holomorphic_volume(&self, sigma: &[f64]) -> Complex64 {
        let mut cols = vec![self.embedding.eval(sigma)];
        cols.extend(self.embedding.tangent_frame(sigma, self.m));
        DMatrix::from_fn(self.m, self.m, |i, j| cols[j][i]).determinant()
    }

    /// Deterministic sample points on the link. Torus links use a regular
    /// angle grid with `per_axis` points per axis; sphere links use a
    /// Fibonacci-type spiral with per_axis² points.
    pub fn sample_points(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let d = self.m - 1;
        match self.embedding {
            Embedding::Trig { .. } => {
                let total = per_axis.pow(d as u32);
                (0..total)
                    .map(|mut idx| {
                        (0..d)
                            .map(|_| {
                                let i = idx % per_axis;
                                idx /= per_axis;
                                // offset keeps samples off the coordinate axes
                                2.0 * PI * (i as f64 + 0.137) / per_axis as f64
                            })
                            .collect()
                    })
                    .collect()
            }
            Embedding::RealSphere => sphere_samples(self.m, per_axis * per_axis),
        }
    }

    /// Largest violation of |σ| = 1, of ω′|_C = 0 and of Im(e^{−iθ}Ω′)|_C = 0
    /// over sample points, returned in that order.
    pub fn invariant_residuals(&self) -> (f64, f64, f64) {
        let mut unit: f64 = 0.0;
        let mut lag: f64 = 0.0;
        let mut special: f64 = 0.0;
        let rot = Complex64::from_polar(1.0, -self.phase_theta);
        for sigma in self.sample_points(9) {
            let p = self.embedding.eval(&sigma);
            let norm = herm_dot(&p, &p).re.sqrt();
            unit = unit.max((norm - 1.0).abs());
            let mut vecs = vec![p];
            vecs.extend(self.embedding.tangent_frame(&sigma, self.m));
            for a in 0..vecs.len() {
                for b in a + 1..vecs.len() {
                    lag = lag.max(herm_dot(&vecs[a], &vecs[b]).im.abs());
                }
            }
            let vol = self.holomorphic_volume(&sigma);
            special = special.max((rot * vol).im.abs() / vol.norm().max(1e-300));
        }
        (unit, lag, special)
    }

    pub fn validate(&self) -> Result<()> {
        let (unit, lag, special) = self.invariant_residuals();
        if unit > 1e-10 {
            return Err(Error::InvalidInput(format!("link is not on the unit sphere (error {unit:e})")));
        }
        if lag > 1e-10 {
            return Err(Error::InvalidInput(format!("cone is not Lagrangian (|ω′|_C| = {lag:e})")));
        }
        if special > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "cone is not special Lagrangian with phase {} (residual {special:e})",
                self.phase_theta
            )));
        }
        Ok(())
    }
}

/// Gram matrix of the analytic tangent frame, checked to be constant
/// across the torus.
fn induced_torus_metric(embedding: &Embedding, m: usize) -> Result<Vec<Vec<f64>>> {
    let d = m - 1;
    let gram_at = |phi: &[f64]| -> Vec<Vec<f64>> {
        let t = embedding.tangent_frame(phi, m);
        (0..d).map(|i| (0..d).map(|j| herm_dot(&t[i], &t[j]).re).collect()).collect()
    };
    let base = gram_at(&vec![0.0; d]);
    for probe in [vec![1.1; d], (0..d).map(|i| 0.7 + 1.3 * i as f64).collect::<Vec<_>>()] {
        let g = gram_at(&probe);
        for i in 0..d {
            for j in 0..d {
                if (g[i][j] - base[i][j]).abs() > 1e-12 {
                    return Err(Error::InvalidInput("embedding does not induce a constant (flat) torus metric".into()));
                }
            }
        }
    }
    Ok(base)
}

/// Quasi-uniform points on S^{m−1}: a Fibonacci spiral for m = 3, otherwise
/// normalized Halton points.
fn sphere_samples(m: usize, count: usize) -> Vec<Vec<f64>> {
    if m == 3 {
        let golden = PI * (3.0 - 5f64.sqrt());
        return (0..count)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let rho = (1.0 - z * z).sqrt();
                let t = golden * i as f64;
                vec![rho * t.cos(), rho * t.sin(), z]
            })
            .collect();
    }
    let primes = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    let halton = |mut i: u64, b: u64| {
        let (mut f, mut r) = (1.0, 0.0);
        while i > 0 {
            f /= b as f64;
            r += f * (i % b) as f64;
            i /= b;
        }
        r
    };
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        // Box–Muller on Halton pairs gives Gaussian vectors, then normalize.
        let g: Vec<f64> = (0..m)
            .map(|k| {
                let u1 = halton(i, primes[(2 * k) % primes.len()]).max(1e-12);
                let u2 = halton(i, primes[(2 * k + 1) % primes.len()]);
                (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
            })
            .collect();
        let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            out.push(g.iter().map(|x| x / n).collect());
        }
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_cones_are_special_lagrangian() {
        for name in SLCone::catalog_names() {
            let cone = SLCone::from_catalog(name).unwrap();
            let (u, l, s) = cone.invariant_residuals();
            assert!(u < 1e-12 && l < 1e-12 && s < 1e-12, "{name}: {u} {l} {s}");
        }
        assert!(SLCone::from_catalog("nope").is_err());
    }

    #[test]
    fn hl_induced_metric_is_hexagonal() {
        let cone = SLCone::harvey_lawson_torus();
        let LinkSpec::FlatTorus { metric } = &cone.link else { panic!() };
        let want = [[2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((metric[i][j] - want[i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn non_lagrangian_torus_rejected() {
        // (e^{iφ₁}, e^{iφ₂}, e^{i(φ₁−φ₂)})/√3 has Σ dψ = 2 dφ₁ ≠ 0.
        let s = 1.0 / 3f64.sqrt();
        let term = |k: Vec<i64>| vec![TrigTerm { re: s, im: 0.0, k }];
        let desc = ConeDescription {
            name: "bad".into(),
            m: 3,
            embedding: Embedding::Trig { coords: vec![term(vec![1, 0]), term(vec![0, 1]), term(vec![1, -1])] },
            dim_g: 2,
            phase_theta: None,
        };
        let err = SLCone::from_description(desc).unwrap_err();
        assert!(err.to_string().contains("Lagrangian"), "{err}");
    }

    #[test]
    fn description_round_trips_through_json() {
        let text = r#"{
            "name": "hl", "m": 3, "dim_g": 2,
            "embedding": {"kind": "trig", "coords": [
                [{"re": 0.5773502691896258, "im": 0.0, "k": [1, 0]}],
                [{"re": 0.5773502691896258, "im": 0.0, "k": [0, 1]}],
                [{"re": 0.5773502691896258, "im": 0.0, "k": [-1, -1]}]
            ]}
        }"#;
        let desc: ConeDescription = serde_json::from_str(text).unwrap();
        let cone = SLCone::from_description(desc).unwrap();
        assert_eq!(cone.link.dim(), 2);
    }

    #[test]
    fn sphere_samples_are_unit() {
        for m in [3, 4] {
            for p in sphere_samples(m, 50) {
                let n: f64 = p.iter().map(|x| x * x).sum();
                assert!((n - 1.0).abs() < 1e-14);
            }
        }
    }
}
