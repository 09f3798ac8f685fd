//! Spectra of the link Laplacian and the exponent bookkeeping built on them.
//!
//! Eigenvalues are stored as eigenvalues of the non-negative operator −Δ_h,
//! so a homogeneous harmonic function r^α φ on the cone over a link of
//! dimension m − 1 corresponds to λ = α(α + m − 2) ≥ 0.

mod exponents;
mod lattice;
pub mod mesh;
pub mod off;
mod sphere;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use exponents::{alpha_roots, exponents, ExponentEntry, ExponentTable, ANALYTIC_TOL, MESH_TOL};
pub use mesh::TriMesh;

/// A compact link manifold together with its metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinkSpec {
    /// ℝ^dim / (2πℤ)^dim with a constant metric `metric` in angle coordinates.
    FlatTorus { metric: Vec<Vec<f64>> },
    /// The unit round sphere S^dim.
    RoundSphere { dim: usize },
    /// A closed, consistently oriented triangulated surface.
    Mesh(TriMesh),
}

impl LinkSpec {
    pub fn flat_torus(metric: Vec<Vec<f64>>) -> Self {
        LinkSpec::FlatTorus { metric }
    }

    pub fn round_sphere(dim: usize) -> Self {
        LinkSpec::RoundSphere { dim }
    }

    /// Intrinsic dimension of the link.
    pub fn dim(&self) -> usize {
        match self {
            LinkSpec::FlatTorus { metric } => metric.len(),
            LinkSpec::RoundSphere { dim } => *dim,
            LinkSpec::Mesh(_) => 2,
        }
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self, LinkSpec::Mesh(_))
    }

    /// Default tolerance for deciding that a weight is exceptional.
    pub fn exceptional_tol(&self) -> f64 {
        if self.is_analytic() {
            ANALYTIC_TOL
        } else {
            MESH_TOL
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LinkSpec::FlatTorus { metric } => lattice::check_metric(metric).map(|_| ()),
            LinkSpec::RoundSphere { dim } => {
                if *dim == 0 {
                    Err(Error::InvalidInput("sphere dimension must be >= 1".into()))
                } else {
                    Ok(())
                }
            }
            LinkSpec::Mesh(mesh) => mesh.validate(),
        }
    }
}

/// How the eigenfunctions of an eigenvalue are known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum BasisTag {
    /// Characters e^{i k·φ} for the listed dual-lattice vectors.
    Lattice(Vec<Vec<i64>>),
    /// Restrictions of harmonic polynomials of this degree.
    SphericalDegree(usize),
    /// Indices of discrete eigenvectors in ascending order.
    Discrete(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenEntry {
    pub lambda: f64,
    pub multiplicity: usize,
    pub basis: BasisTag,
}

/// Eigenvalues of −Δ_h in `[0, lambda_max]`, sorted strictly increasing.
///
/// `lambda_max` is kept because completeness of the list is only known up
/// to it; exponent tables use it to bound the window they can vouch for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub lambda_max: f64,
    pub entries: Vec<EigenEntry>,
    /// Clustering tolerance used to merge eigenvalues into one entry.
    pub tol: f64,
}

impl Spectrum {
    pub fn iter(&self) -> impl Iterator<Item = &EigenEntry> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Eigenvalues repeated according to multiplicity.
    pub fn flattened(&self) -> Vec<f64> {
        self.entries.iter().flat_map(|e| std::iter::repeat_n(e.lambda, e.multiplicity)).collect()
    }

    /// Entry whose eigenvalue matches `lambda` within the spectrum's tolerance.
    pub fn find(&self, lambda: f64) -> Option<&EigenEntry> {
        self.entries.iter().find(|e| (e.lambda - lambda).abs() <= self.tol * lambda.abs().max(1.0))
    }
}

/// All eigenvalues of −Δ_h on `link` in `[0, lambda_max]`.
pub fn eigenvalues(link: &LinkSpec, lambda_max: f64) -> Result<Spectrum> {
    if !(lambda_max >= 0.0) || !lambda_max.is_finite() {
        return Err(Error::InvalidInput(format!("lambda_max must be finite and non-negative, got {lambda_max}")));
    }
    match link {
        LinkSpec::FlatTorus { metric } => lattice::torus_spectrum(metric, lambda_max),
        LinkSpec::RoundSphere { dim } => sphere::sphere_spectrum(*dim, lambda_max),
        LinkSpec::Mesh(mesh) => mesh::mesh_spectrum(mesh, lambda_max, &Default::default()),
    }
}

/// Merges sorted eigenvalues into entries, grouping values within
/// `tol · max(1, λ)` of the first member of a cluster.
pub(crate) fn cluster<T>(sorted: Vec<(f64, T)>, tol: f64, mut tag: impl FnMut(Vec<T>) -> BasisTag) -> Vec<EigenEntry> {
    let mut out = Vec::new();
    let mut it = sorted.into_iter().peekable();
    while let Some((lead, first)) = it.next() {
        let mut sum = lead;
        let mut members = vec![first];
        while let Some((next, _)) = it.peek() {
            if (next - lead).abs() <= tol * lead.abs().max(1.0) {
                let (v, t) = it.next().unwrap();
                sum += v;
                members.push(t);
            } else {
                break;
            }
        }
        let multiplicity = members.len();
        out.push(EigenEntry { lambda: sum / multiplicity as f64, multiplicity, basis: tag(members) });
    }
    out
}
