//! Constant-coefficient symmetric cyclic tridiagonal systems.
//!
//! The corner couplings are split off as a rank-one update (Sherman-Morrison)
//! so a solve costs two sweeps of the Thomas algorithm; the correction
//! vector is computed once at construction.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PeriodicTridiagonal {
    diag: f64,
    off: f64,
    upper: Vec<f64>,
    inv_pivot: Vec<f64>,
    correction: Vec<f64>,
    /// `1 / (1 + v . z)` with `v = (1, 0, ..., 0, off / gamma)`.
    scale: f64,
    gamma: f64,
}

impl PeriodicTridiagonal {
    /// Matrix with `diag` on the diagonal and `off` on both cyclic
    /// off-diagonals. Requires `n >= 3` and `|diag| > 2 |off|`.
    pub fn new(n: usize, diag: f64, off: f64) -> Self {
        assert!(n >= 3, "cyclic system needs at least 3 unknowns");
        let gamma = -diag;
        // Diagonal of the reduced (non-cyclic) matrix at both ends.
        let first = diag - gamma;
        let last = diag - off * off / gamma;

        let mut upper = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut pivot = first;
        for i in 0..n {
            if i > 0 {
                let d = if i == n - 1 { last } else { diag };
                pivot = d - off * upper[i - 1];
            }
            inv_pivot[i] = 1.0 / pivot;
            upper[i] = off / pivot;
        }

        let mut this = Self {
            diag,
            off,
            upper,
            inv_pivot,
            correction: vec![0.0; n],
            scale: 0.0,
            gamma,
        };
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = off;
        let mut z = vec![0.0; n];
        this.thomas(&u, &mut z);
        this.scale = 1.0 / (1.0 + z[0] + z[n - 1] * off / gamma);
        this.correction = z;
        this
    }

    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    pub fn diag(&self) -> f64 {
        self.diag
    }

    pub fn off(&self) -> f64 {
        self.off
    }

    /// Positive diagonal, non-positive off-diagonals, strict row dominance.
    pub fn is_m_matrix(&self) -> bool {
        self.diag > 0.0 && self.off <= 0.0 && self.diag > 2.0 * self.off.abs()
    }

    fn thomas(&self, rhs: &[f64], out: &mut [f64]) {
        let n = self.len();
        out[0] = rhs[0] * self.inv_pivot[0];
        for i in 1..n {
            out[i] = (rhs[i] - self.off * out[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            out[i] -= self.upper[i] * out[i + 1];
        }
    }

    /// Solves into `out` without a residual check.
    pub fn solve_into(&self, rhs: &[f64], out: &mut [f64]) {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        assert_eq!(out.len(), n);
        self.thomas(rhs, out);
        let vy = out[0] + out[n - 1] * self.off / self.gamma;
        let factor = vy * self.scale;
        for (o, z) in out.iter_mut().zip(&self.correction) {
            *o -= factor * z;
        }
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let left = x[(i + n - 1) % n];
            let right = x[(i + 1) % n];
            out[i] = self.diag * x[i] + self.off * (left + right);
        }
    }

    /// Sup-norm residual `|A x - rhs|`.
    pub fn residual(&self, x: &[f64], rhs: &[f64]) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let left = x[(i + n - 1) % n];
            let right = x[(i + 1) % n];
            let r = self.diag * x[i] + self.off * (left + right) - rhs[i];
            worst = worst.max(r.abs());
        }
        worst
    }

    /// Solves and rejects the result if the residual exceeds `1e-12` of the
    /// scale `|rhs| + |A| |x|`.
    pub fn solve_checked(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.solve_into(rhs, &mut out);
        let residual = self.residual(&out, rhs);
        let norm_a = self.diag.abs() + 2.0 * self.off.abs();
        let x_sup = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rhs_sup = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let limit = 1e-12 * (rhs_sup + norm_a * x_sup);
        if !(residual <= limit) {
            return Err(Error::SolverFailure { residual, limit });
        }
        Ok(out)
    }
}
