use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::error::{Error, Result};

/// Uniform periodic grid on `[0, omega)`; node `n` is identified with node 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub omega: f64,
    pub dx: f64,
}

impl Grid {
    pub fn new(omega: f64, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::GridSize(n));
        }
        Ok(Self {
            n,
            omega,
            dx: omega / n as f64,
        })
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.node(j))
    }

    /// Left node of the cell containing `x`, and the offset within that
    /// cell as a fraction of `dx`.
    pub fn cell_of(&self, x: f64) -> (usize, f64) {
        let x = x.rem_euclid(self.omega);
        let j = ((x / self.dx).floor() as usize).min(self.n - 1);
        let theta = ((x - self.node(j)) / self.dx).clamp(0.0, 1.0);
        (j, theta)
    }
}

pub fn build_grid(config: &ModelConfig, n: usize) -> Result<Grid> {
    Grid::new(config.omega, n)
}

/// Nodal values of one periodic function at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>, time: f64) -> Self {
        assert_eq!(values.len(), grid.n, "field length must match the grid");
        Self { grid, values, time }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self::new(grid, vec![value; grid.n], 0.0)
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::new(grid, grid.nodes().map(f).collect(), 0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Lumped-mass integral `sum_j v_j dx`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.grid.omega
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// `max_j |a_j - b_j|`.
pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
