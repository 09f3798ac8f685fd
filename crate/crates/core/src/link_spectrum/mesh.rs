//! Triangulated links and their discrete Laplace–Beltrami spectra.
//!
//! The stiffness matrix uses cotangent weights and the mass matrix is the
//! barycentric lumping (a third of each incident triangle's area). Vertices
//! may live in any ℝ^d, which lets a flat torus be meshed through an
//! isometric embedding (ℝ⁴ Clifford torus, ℝ⁶ Harvey–Lawson link).

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sprs::{CsMat, TriMat};
use sprs_ldl::{Ldl, LdlNumeric};

use super::{cluster, BasisTag, Spectrum};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    pub ambient_dim: usize,
    /// Vertex coordinates, `ambient_dim` per vertex.
    pub coords: Vec<f64>,
    pub faces: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn new(ambient_dim: usize, coords: Vec<f64>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = TriMesh { ambient_dim, coords, faces };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len().checked_div(self.ambient_dim).unwrap_or(0)
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    /// Checks closedness, consistent orientation and non-degenerate faces.
    pub fn validate(&self) -> Result<()> {
        let d = self.ambient_dim;
        if d < 2 || !self.coords.len().is_multiple_of(d) {
            return Err(Error::InvalidInput(format!(
                "mesh coordinates ({}) are not a multiple of ambient dimension {d}",
                self.coords.len()
            )));
        }
        let nv = self.num_vertices();
        if nv < 4 || self.faces.len() < 4 {
            return Err(Error::InvalidInput("mesh is too small to be closed".into()));
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (f, tri) in self.faces.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidInput(format!("face {f} references a missing vertex")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidInput(format!("face {f} repeats a vertex")));
            }
            let area = self.face_geometry(tri).area;
            if !(area > 1e-300) || !area.is_finite() {
                return Err(Error::InvalidInput(format!("face {f} has zero area")));
            }
            for k in 0..3 {
                *directed.entry((tri[k], tri[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        for (&(a, b), &count) in &directed {
            if count != 1 {
                return Err(Error::InvalidInput(format!(
                    "edge ({a}, {b}) is used {count} times in the same direction"
                )));
            }
            if !directed.contains_key(&(b, a)) {
                return Err(Error::InvalidInput(format!(
                    "mesh is not closed: edge ({a}, {b}) has only one incident face"
                )));
            }
        }
        Ok(())
    }

    fn face_geometry(&self, tri: &[usize; 3]) -> FaceGeometry {
        let p = [self.vertex(tri[0]), self.vertex(tri[1]), self.vertex(tri[2])];
        // cot of the angle at corner k, opposite edge (k+1, k+2)
        let mut cot = [0.0; 3];
        let mut twice_area = 0.0;
        for k in 0..3 {
            let a: Vec<f64> = p[(k + 1) % 3].iter().zip(p[k]).map(|(x, y)| x - y).collect();
            let b: Vec<f64> = p[(k + 2) % 3].iter().zip(p[k]).map(|(x, y)| x - y).collect();
            let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            let aa: f64 = a.iter().map(|x| x * x).sum();
            let bb: f64 = b.iter().map(|x| x * x).sum();
            let cross = (aa * bb - ab * ab).max(0.0).sqrt();
            twice_area = cross;
            cot[k] = ab / cross;
        }
        FaceGeometry { area: 0.5 * twice_area, cot }
    }

    pub fn total_area(&self) -> f64 {
        self.faces.iter().map(|t| self.face_geometry(t).area).sum()
    }

    /// Cotangent stiffness matrix (positive semidefinite) and lumped masses.
    pub fn laplacian(&self) -> (CsMat<f64>, Vec<f64>) {
        let n = self.num_vertices();
        let mut tri = TriMat::new((n, n));
        let mut mass = vec![0.0; n];
        for f in &self.faces {
            let g = self.face_geometry(f);
            for k in 0..3 {
                let (i, j) = (f[(k + 1) % 3], f[(k + 2) % 3]);
                let w = 0.5 * g.cot[k];
                tri.add_triplet(i, j, -w);
                tri.add_triplet(j, i, -w);
                tri.add_triplet(i, i, w);
                tri.add_triplet(j, j, w);
                mass[f[k]] += g.area / 3.0;
            }
        }
        (tri.to_csr(), mass)
    }

    /// Flat torus embedded in ℂ³ as the Harvey–Lawson link
    /// (e^{iφ₁}, e^{iφ₂}, e^{−i(φ₁+φ₂)})/√3, sampled on an n×n angle grid.
    /// Every triangle is equilateral, so the mesh is a regular hexagonal lattice.
    pub fn harvey_lawson_torus(n: usize) -> Self {
        let s = 1.0 / 3f64.sqrt();
        let mut coords = Vec::with_capacity(n * n * 6);
        for j in 0..n {
            for i in 0..n {
                let p1 = 2.0 * PI * i as f64 / n as f64;
                let p2 = 2.0 * PI * j as f64 / n as f64;
                let p3 = -(p1 + p2);
                for phi in [p1, p2, p3] {
                    coords.push(s * phi.cos());
                    coords.push(s * phi.sin());
                }
            }
        }
        TriMesh { ambient_dim: 6, coords, faces: grid_faces(n, n, true) }
    }

    /// Clifford-type flat torus (a cos φ₁, a sin φ₁, b cos φ₂, b sin φ₂) in ℝ⁴.
    pub fn clifford_torus(n1: usize, n2: usize, a: f64, b: f64) -> Self {
        let mut coords = Vec::with_capacity(n1 * n2 * 4);
        for j in 0..n2 {
            for i in 0..n1 {
                let p1 = 2.0 * PI * i as f64 / n1 as f64;
                let p2 = 2.0 * PI * j as f64 / n2 as f64;
                coords.extend_from_slice(&[a * p1.cos(), a * p1.sin(), b * p2.cos(), b * p2.sin()]);
            }
        }
        TriMesh { ambient_dim: 4, coords, faces: grid_faces(n1, n2, false) }
    }

    /// Unit icosphere after `levels` rounds of 4-to-1 subdivision.
    pub fn icosphere(levels: usize) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<[f64; 3]> = vec![
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ];
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        let normalize = |v: [f64; 3]| {
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / r, v[1] / r, v[2] / r]
        };
        for v in verts.iter_mut() {
            *v = normalize(*v);
        }
        for _ in 0..levels {
            let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
            let mut next = Vec::with_capacity(faces.len() * 4);
            let mut mid = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| {
                let key = (a.min(b), a.max(b));
                *midpoint.entry(key).or_insert_with(|| {
                    let (p, q) = (verts[a], verts[b]);
                    verts.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                    verts.len() - 1
                })
            };
            for [a, b, c] in faces {
                let ab = mid(a, b, &mut verts);
                let bc = mid(b, c, &mut verts);
                let ca = mid(c, a, &mut verts);
                next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        TriMesh { ambient_dim: 3, coords: verts.into_iter().flatten().collect(), faces }
    }
}

struct FaceGeometry {
    area: f64,
    cot: [f64; 3],
}

/// Periodic grid triangulation; `anti` splits cells along the (1, −1) diagonal.
fn grid_faces(n1: usize, n2: usize, anti: bool) -> Vec<[usize; 3]> {
    let idx = |i: usize, j: usize| (j % n2) * n1 + (i % n1);
    let mut faces = Vec::with_capacity(2 * n1 * n2);
    for j in 0..n2 {
        for i in 0..n1 {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            if anti {
                faces.push([a, b, d]);
                faces.push([b, c, d]);
            } else {
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
    }
    faces
}

#[derive(Clone, Debug)]
pub struct MeshEigenOptions {
    /// Meshes up to this many vertices use a dense symmetric eigensolver.
    pub dense_limit: usize,
    /// Relative residual ‖Sx − θx‖ / max(1, θ) at which a Ritz pair is accepted.
    pub residual_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Relative tolerance for merging eigenvalues into one entry.
    pub cluster_tol: f64,
    /// Ritz pairs at the top of the block not required to converge.
    pub guard: usize,
}

impl Default for MeshEigenOptions {
    fn default() -> Self {
        MeshEigenOptions {
            dense_limit: 700,
            residual_tol: 1e-9,
            max_iter: 500,
            seed: 0x5eed,
            cluster_tol: super::MESH_TOL,
            guard: 6,
        }
    }
}

/// Lowest eigenvalues of the generalized problem K x = λ M x.
pub fn mesh_spectrum(mesh: &TriMesh, lambda_max: f64, opts: &MeshEigenOptions) -> Result<Spectrum> {
    mesh.validate()?;
    let values = lowest_eigenvalues_up_to(mesh, lambda_max, opts)?;
    let indexed: Vec<(f64, usize)> =
        values.into_iter().filter(|&v| v <= lambda_max).enumerate().map(|(i, v)| (v.max(0.0), i)).collect();
    let entries = cluster(indexed, opts.cluster_tol, BasisTag::Discrete);
    Ok(Spectrum { lambda_max, entries, tol: opts.cluster_tol })
}

/// Symmetrized operator S = M^{-1/2} K M^{-1/2}.
fn symmetrized(mesh: &TriMesh) -> CsMat<f64> {
    let (k, mass) = mesh.laplacian();
    let inv_sqrt: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut tri = TriMat::new(k.shape());
    for (v, (i, j)) in k.iter() {
        tri.add_triplet(i, j, v * inv_sqrt[i] * inv_sqrt[j]);
    }
    tri.to_csr()
}

fn lowest_eigenvalues_up_to(mesh: &TriMesh, lambda_max: f64, opts: &MeshEigenOptions) -> Result<Vec<f64>> {
    let s = symmetrized(mesh);
    let n = s.rows();
    if n <= opts.dense_limit {
        let dense = DMatrix::from_fn(n, n, |i, j| *s.get(i, j).unwrap_or(&0.0));
        let dense = (&dense + dense.transpose()) * 0.5;
        let mut vals: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        return Ok(vals);
    }
    // Weyl's law for surfaces: N(λ) ≈ area · λ / 4π.
    let weyl = mesh.total_area() * lambda_max / (4.0 * PI);
    let mut block = ((1.5 * weyl).ceil() as usize + 2 * opts.guard + 4).min(n);
    loop {
        let vals = subspace_iteration(&s, spectral_shift(mesh), block, opts.k_wanted(block), opts)?;
        let top_converged = vals[opts.k_wanted(block) - 1];
        if top_converged > lambda_max || block == n {
            return Ok(vals[..opts.k_wanted(block)].to_vec());
        }
        block = (block * 2).min(n);
    }
}

impl MeshEigenOptions {
    fn k_wanted(&self, block: usize) -> usize {
        block.saturating_sub(self.guard).max(1)
    }
}

/// The `count` smallest eigenvalues of `k` + their eigenvectors.
///
/// Public for callers that want a fixed number of eigenpairs rather than
/// everything below a cutoff.
pub fn smallest_eigenpairs(mesh: &TriMesh, count: usize, opts: &MeshEigenOptions) -> Result<(Vec<f64>, DMatrix<f64>)> {
    mesh.validate()?;
    let s = symmetrized(mesh);
    let block = (count + opts.guard).min(s.rows());
    let (vals, vecs) = subspace_iteration_vectors(&s, spectral_shift(mesh), block, count.min(block), opts)?;
    Ok((vals[..count.min(block)].to_vec(), vecs.columns(0, count.min(block)).into_owned()))
}

fn subspace_iteration(
    s: &CsMat<f64>,
    shift: f64,
    block: usize,
    wanted: usize,
    opts: &MeshEigenOptions,
) -> Result<Vec<f64>> {
    subspace_iteration_vectors(s, shift, block, wanted, opts).map(|(v, _)| v)
}

/// Shift of the order of the first nonzero eigenvalue, 4π / area.
fn spectral_shift(mesh: &TriMesh) -> f64 {
    0.1 * 4.0 * PI / mesh.total_area()
}

fn spmm(s: &CsMat<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = s.rows();
    let cols: Vec<Vec<f64>> = (0..x.ncols())
        .into_par_iter()
        .map(|c| {
            let col = x.column(c);
            (0..n)
                .map(|i| {
                    let row = s.outer_view(i).unwrap();
                    row.iter().map(|(j, v)| v * col[j]).sum()
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(n, x.ncols(), |i, c| cols[c][i])
}

/// Shift-invert subspace iteration with Rayleigh–Ritz on S.
fn subspace_iteration_vectors(
    s: &CsMat<f64>,
    shift: f64,
    block: usize,
    wanted: usize,
    opts: &MeshEigenOptions,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = s.rows();
    // S is positive semidefinite, so S + σI with σ > 0 is positive definite.
    let mut shifted = TriMat::new((n, n));
    for (v, (i, j)) in s.iter() {
        shifted.add_triplet(i, j, *v);
    }
    for i in 0..n {
        shifted.add_triplet(i, i, shift);
    }
    let shifted: CsMat<f64> = shifted.to_csc();
    let ldl: LdlNumeric<f64, usize> = Ldl::new()
        .check_symmetry(sprs::SymmetryCheck::DontCheckSymmetry)
        .numeric(shifted.view())
        .map_err(|e| Error::NoConvergence(format!("factorization failed: {e}")))?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = DMatrix::from_fn(n, block, |_, _| rng.gen::<f64>() - 0.5);
    for iter in 0..opts.max_iter {
        let cols: Vec<Vec<f64>> = (0..block)
            .into_par_iter()
            .map(|c| {
                let rhs: Vec<f64> = x.column(c).iter().copied().collect();
                ldl.solve(&rhs)
            })
            .collect();
        let y = DMatrix::from_fn(n, block, |i, c| cols[c][i]);
        let q = y.qr().q();
        let sq = spmm(s, &q);
        let h = q.transpose() * &sq;
        let h = (&h + h.transpose()) * 0.5;
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let w = DMatrix::from_fn(block, block, |r, c| eig.eigenvectors[(r, order[c])]);
        x = &q * &w;
        let sx = &sq * &w;
        let converged = (0..wanted).all(|j| {
            let r: DVector<f64> = sx.column(j) - x.column(j) * theta[j];
            r.norm() <= opts.residual_tol * theta[j].abs().max(1.0)
        });
        if converged {
            return Ok((theta, x));
        }
        if iter + 1 == opts.max_iter {
            break;
        }
    }
    Err(Error::NoConvergence(format!(
        "subspace iteration (block {block}) did not converge in {} iterations",
        opts.max_iter
    )))
}
