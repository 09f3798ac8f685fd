//! Moment maps of the automorphism group U(m) ⋉ ℂ^m of flat ℂ^m.
//!
//! With ω′ = Σ dx_j ∧ dy_j, contraction with a vector field X gives
//! (X ⌟ ω′)(W) = Im⟨X, W⟩, ⟨X, W⟩ = Σ conj(X_j) W_j. The element (A, v, c)
//! generates X(z) = Az + v, and
//!
//! μ_X(z) = (i/2) Σ a_ij z̄_i z_j + (i/2) Σ (v_i z̄_i − v̄_i z_i) + c,
//!
//! the first sum being ½ Im⟨Az, z⟩.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MomentElement {
    /// Skew-adjoint matrix in u(m).
    pub a: DMatrix<Complex64>,
    pub v: DVector<Complex64>,
    pub c: f64,
}

const I: Complex64 = Complex64::new(0.0, 1.0);

impl MomentElement {
    pub fn new(a: DMatrix<Complex64>, v: DVector<Complex64>, c: f64) -> Result<Self> {
        let m = v.len();
        if a.nrows() != m || a.ncols() != m {
            return Err(Error::InvalidInput(format!("A is {}x{} but v has length {m}", a.nrows(), a.ncols())));
        }
        let skew = (&a + a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if skew > 1e-14 * a.iter().map(|z| z.norm()).fold(1.0, f64::max) {
            return Err(Error::InvalidInput(format!("A is not skew-adjoint (|A + A*| = {skew:e})")));
        }
        Ok(MomentElement { a, v, c })
    }

    pub fn zero(m: usize) -> Self {
        MomentElement { a: DMatrix::zeros(m, m), v: DVector::zeros(m), c: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn from_matrix(a: DMatrix<Complex64>) -> Result<Self> {
        let m = a.nrows();
        Self::new(a, DVector::zeros(m), 0.0)
    }

    pub fn translation(v: DVector<Complex64>) -> Self {
        let m = v.len();
        MomentElement { a: DMatrix::zeros(m, m), v, c: 0.0 }
    }

    pub fn constant(m: usize, c: f64) -> Self {
        MomentElement { c, ..Self::zero(m) }
    }

    pub fn has_matrix_part(&self) -> bool {
        self.a.iter().any(|z| z.norm() > 0.0)
    }

    pub fn has_translation_part(&self) -> bool {
        self.v.iter().any(|z| z.norm() > 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        MomentElement { a: self.a.map(|z| z * s), v: self.v.map(|z| z * s), c: self.c * s }
    }

    pub fn add(&self, other: &Self) -> Self {
        MomentElement { a: &self.a + &other.a, v: &self.v + &other.v, c: self.c + other.c }
    }

    /// The generated vector field X(z) = Az + v.
    pub fn vector_field(&self, z: &[Complex64]) -> DVector<Complex64> {
        let zv = DVector::from_column_slice(z);
        &self.a * zv + &self.v
    }
}

/// μ_X(z). The imaginary part of the defining sum vanishes by skew-adjointness.
pub fn moment_eval(x: &MomentElement, z: &[Complex64]) -> f64 {
    moment_eval_complex(x, z).re
}

/// The defining sum before taking the real part, exposed so the
/// real-valuedness of μ_X can be checked.
pub fn moment_eval_complex(x: &MomentElement, z: &[Complex64]) -> Complex64 {
    let m = x.dim();
    let mut quad = Complex64::new(0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            quad += x.a[(i, j)] * z[i].conj() * z[j];
        }
    }
    let mut lin = Complex64::new(0.0, 0.0);
    for (v, w) in x.v.iter().zip(z) {
        lin += v * w.conj() - v.conj() * w;
    }
    I * 0.5 * (quad + lin) + x.c
}

/// Max over samples and real directions of |dμ_X(W) − ω′(X, W)|, with dμ_X
/// from centered differences of step 1e-5.
pub fn verify_hamiltonian(x: &MomentElement, samples: &[Vec<Complex64>]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no sample points".into()));
    }
    let h = 1e-5;
    let m = x.dim();
    let mut worst: f64 = 0.0;
    for z in samples {
        if z.len() != m {
            return Err(Error::InvalidInput(format!("sample has length {}, expected {m}", z.len())));
        }
        let field = x.vector_field(z);
        for j in 0..m {
            for dir in [Complex64::new(1.0, 0.0), I] {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[j] += dir * h;
                zm[j] -= dir * h;
                let fd = (moment_eval(x, &zp) - moment_eval(x, &zm)) / (2.0 * h);
                // ω′(X, W) = Im⟨X, W⟩ with W = dir · e_j
                let exact = (field[j].conj() * dir).im;
                worst = worst.max((fd - exact).abs());
            }
        }
    }
    Ok(worst)
}

/// Real basis of su(m): i(E_jj − E_{j+1,j+1}), E_jk − E_kj, i(E_jk + E_kj).
pub fn su_basis(m: usize) -> Vec<MomentElement> {
    let mut out = Vec::with_capacity(m * m - 1);
    for j in 0..m - 1 {
        let mut a = DMatrix::zeros(m, m);
        a[(j, j)] = I;
        a[(j + 1, j + 1)] = -I;
        out.push(MomentElement { a, ..MomentElement::zero(m) });
    }
    for j in 0..m {
        for k in j + 1..m {
            let mut a = DMatrix::zeros(m, m);
            a[(j, k)] = Complex64::new(1.0, 0.0);
            a[(k, j)] = Complex64::new(-1.0, 0.0);
            out.push(MomentElement { a, ..MomentElement::zero(m) });
            let mut b = DMatrix::zeros(m, m);
            b[(j, k)] = I;
            b[(k, j)] = I;
            out.push(MomentElement { a: b, ..MomentElement::zero(m) });
        }
    }
    out
}

/// Real basis of the translations ℂ^m: e_j and i·e_j.
pub fn translation_basis(m: usize) -> Vec<MomentElement> {
    let mut out = Vec::with_capacity(2 * m);
    for j in 0..m {
        for s in [Complex64::new(1.0, 0.0), I] {
            let mut v = DVector::zeros(m);
            v[j] = s;
            out.push(MomentElement::translation(v));
        }
    }
    out
}
