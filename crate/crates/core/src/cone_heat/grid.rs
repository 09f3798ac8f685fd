use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Graded radial grid r_j = R·(j/n)^q, j = 1..=n, on (0, R].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub radius: f64,
    pub n_cells: usize,
    pub grading: f64,
}

impl Default for RadialGrid {
    fn default() -> Self {
        RadialGrid { radius: 1.0, n_cells: 400, grading: 2.0 }
    }
}

impl RadialGrid {
    pub fn new(radius: f64, n_cells: usize, grading: f64) -> Result<Self> {
        let g = RadialGrid { radius, n_cells, grading };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::InvalidInput(format!("grid radius must be positive, got {}", self.radius)));
        }
        if self.n_cells < 3 {
            return Err(Error::InvalidInput(format!("need at least 3 cells, got {}", self.n_cells)));
        }
        if !(self.grading >= 1.0) || !self.grading.is_finite() {
            return Err(Error::InvalidInput(format!("grading exponent must be >= 1, got {}", self.grading)));
        }
        Ok(())
    }

    pub fn nodes(&self) -> Vec<f64> {
        let n = self.n_cells as f64;
        (1..=self.n_cells).map(|j| self.radius * (j as f64 / n).powf(self.grading)).collect()
    }

    /// Innermost node.
    pub fn r_min(&self) -> f64 {
        self.radius * (1.0 / self.n_cells as f64).powf(self.grading)
    }

    /// The same grid with twice as many cells.
    pub fn refined(&self) -> Self {
        RadialGrid { n_cells: 2 * self.n_cells, ..self.clone() }
    }
}
