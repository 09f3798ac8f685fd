use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::TorusGrid;

/// Approximately solves (I − dt·Δ)v = f on the periodic grid through the
/// factored operator Πₐ (I − dt·Δₐ). Each one-dimensional inverse is a
/// circulant matrix whose kernel comes from a single FFT; applying it as
/// a fixed-order convolution keeps every node's arithmetic identical, so
/// grid translations commute with the solve bit for bit.
pub struct HeatSolver {
    grid: TorusGrid,
    /// −symbol of the 1-D Laplacian: (4/dx²) sin²(π k / n) ≥ 0.
    symbol: Vec<f64>,
}

impl HeatSolver {
    pub fn new(grid: TorusGrid) -> Self {
        let h2 = grid.dx() * grid.dx();
        let symbol = (0..grid.n)
            .map(|k| {
                let s = (std::f64::consts::PI * k as f64 / grid.n as f64).sin();
                4.0 * s * s / h2
            })
            .collect();
        HeatSolver { grid, symbol }
    }

    /// Convolution kernel of (I − dt·Δₐ)⁻¹, symmetrized so g[k] = g[n−k].
    pub fn kernel(&self, dt: f64) -> Vec<f64> {
        let n = self.grid.n;
        let mut data: Vec<Complex64> =
            self.symbol.iter().map(|s| Complex64::new(1.0 / (n as f64 * (1.0 + dt * s)), 0.0)).collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut data);
        (0..n).map(|k| 0.5 * (data[k].re + data[(n - k) % n].re)).collect()
    }

    pub fn solve(&self, rhs: &[f64], dt: f64) -> Vec<f64> {
        let n = self.grid.n;
        let g = self.kernel(dt);
        let mut data = rhs.to_vec();
        for axis in 0..self.grid.m {
            let stride = n.pow(axis as u32);
            let src = &data;
            data = (0..src.len())
                .into_par_iter()
                .map(|node| {
                    let i = (node / stride) % n;
                    let base = node - i * stride;
                    g.iter().enumerate().fold(0.0, |acc, (k, gk)| acc + gk * src[base + ((i + n - k) % n) * stride])
                })
                .collect();
        }
        data
    }
}
