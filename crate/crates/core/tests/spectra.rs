//! Link spectra against oracles that share no code with the library.

use conic_lmcf::link_spectrum::mesh::{smallest_eigenpairs, MeshEigenOptions};
use conic_lmcf::link_spectrum::{eigenvalues, LinkSpec, TriMesh};
use conic_lmcf::sl_cones::SLCone;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// −Δf / f for f = cos(k·φ) at a generic point, with Δ = Σ G^{ij} ∂ᵢ∂ⱼ
/// evaluated by central second differences of f itself.
fn numeric_eigenvalue(ginv: &DMatrix<f64>, k: &[i64]) -> f64 {
    let d = k.len();
    let f = |phi: &DVector<f64>| (0..d).map(|i| k[i] as f64 * phi[i]).sum::<f64>().cos();
    let p = DVector::from_fn(d, |i, _| 0.31 + 0.17 * i as f64);
    let h = 1e-4;
    let mut lap = 0.0;
    for i in 0..d {
        for j in 0..d {
            let e = |a: usize, s: f64| DVector::from_fn(d, |r, _| if r == a { s } else { 0.0 });
            let hess = (f(&(&p + e(i, h) + e(j, h))) - f(&(&p + e(i, h) - e(j, h))) - f(&(&p - e(i, h) + e(j, h)))
                + f(&(&p - e(i, h) - e(j, h))))
                / (4.0 * h * h);
            lap += ginv[(i, j)] * hess;
        }
    }
    -lap / f(&p)
}

/// Brute-force spectrum: every k in a box, numerically differentiated.
fn oracle_spectrum(metric: &[Vec<f64>], lambda_max: f64, reach: i64) -> Vec<f64> {
    let d = metric.len();
    let g = DMatrix::from_fn(d, d, |i, j| metric[i][j]);
    let ginv = g.try_inverse().unwrap();
    let mut values = Vec::new();
    let mut k = vec![-reach; d];
    loop {
        let lam = numeric_eigenvalue(&ginv, &k);
        if lam <= lambda_max + 1e-6 {
            values.push(lam);
        }
        let mut a = 0;
        loop {
            if a == d {
                values.sort_by(f64::total_cmp);
                return values;
            }
            k[a] += 1;
            if k[a] <= reach {
                break;
            }
            k[a] = -reach;
            a += 1;
        }
    }
}

fn flattened(link: &LinkSpec, lambda_max: f64) -> Vec<f64> {
    eigenvalues(link, lambda_max).unwrap().flattened()
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol * y.abs().max(1.0), "{x} vs {y}");
    }
}

#[test]
fn harvey_lawson_link_matches_oracle() {
    let cone = SLCone::harvey_lawson_torus();
    let LinkSpec::FlatTorus { metric } = &cone.link else { panic!("torus link expected") };
    let ours = flattened(&cone.link, 12.0);
    let oracle = oracle_spectrum(metric, 12.0, 6);
    assert_close(&ours, &oracle, 1e-6);
    // λ = 2 with multiplicity 6 gives the order-one harmonics.
    assert_eq!(ours.iter().filter(|l| (**l - 2.0).abs() < 1e-9).count(), 6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn sheared_tori_match_oracle(a in 0.5f64..2.0, b in 0.5f64..2.0, c in -0.4f64..0.4) {
        let off = c * (a * b).sqrt();
        let metric = vec![vec![a, off], vec![off, b]];
        let ours = flattened(&LinkSpec::flat_torus(metric.clone()), 9.0);
        // |k|² ≤ λ_max · max eig(G) bounds the box of contributing k.
        let reach = (9.0 * (a + b)).sqrt().ceil() as i64 + 1;
        let oracle = oracle_spectrum(&metric, 9.0, reach);
        assert_close(&ours, &oracle, 1e-6);
    }
}

#[test]
fn three_torus_matches_oracle() {
    let metric = vec![vec![1.0, 0.2, 0.0], vec![0.2, 1.5, 0.1], vec![0.0, 0.1, 0.8]];
    assert_close(&flattened(&LinkSpec::flat_torus(metric.clone()), 6.0), &oracle_spectrum(&metric, 6.0, 4), 1e-6);
}

#[test]
fn mesh_spectrum_converges_to_lattice() {
    let cone = SLCone::harvey_lawson_torus();
    let exact = flattened(&cone.link, 20.0)[..10].to_vec();
    let err = |n: usize| {
        let (vals, _) =
            smallest_eigenpairs(&TriMesh::harvey_lawson_torus(n), 10, &MeshEigenOptions::default()).unwrap();
        vals.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(12), err(24));
    let order = (e1 / e2).log2();
    assert!(order > 1.8, "order {order}: {e1} {e2}");
}
