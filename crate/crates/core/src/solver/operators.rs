use crate::config::ModelConfig;
use crate::solver::grid::Grid;
use crate::solver::tridiag::PeriodicTridiagonal;
use crate::error::Result;

/// Discrete operators for both the decoupled and the coupled model.
///
/// Space is P1 with a lumped mass matrix, so the stiffness operator is the
/// cyclic second difference `(-1, 2, -1) / dx^2` and every Dirac load is
/// split between the two nodes bracketing its junction by hat-function
/// weights, then divided by the nodal mass `dx`.
#[derive(Debug, Clone)]
pub struct Operators {
    pub grid: Grid,
    /// `F_j = sum_k c_k phi_j(a_k) / dx - A` for the raw forcing `f`.
    pub load: Vec<f64>,
    /// Effective diffusivity, evaporation and load of the decoupled
    /// `eta` equation.
    pub eta_sigma: f64,
    pub alpha: f64,
    pub eta_load: Vec<f64>,
    /// `sigma1 / tau`, and the `h` load `-F / tau`.
    pub h_sigma: f64,
    pub h_load: Vec<f64>,
    pub zeta_sigma: f64,
}

/// Nodes and weights carrying a unit Dirac mass at `a`.
pub fn hat_weights(grid: &Grid, a: f64) -> [(usize, f64); 2] {
    let (j, theta) = grid.cell_of(a);
    [(j, 1.0 - theta), ((j + 1) % grid.n, theta)]
}

fn assemble_load(grid: &Grid, junctions: &[f64], strengths: &[f64], offset: f64) -> Vec<f64> {
    let mut load = vec![-offset; grid.n];
    for (&a, &c) in junctions.iter().zip(strengths) {
        for (j, w) in hat_weights(grid, a) {
            load[j] += c * w / grid.dx;
        }
    }
    load
}

pub fn assemble_operators(grid: &Grid, config: &ModelConfig) -> Operators {
    let load = assemble_load(
        grid,
        &config.junctions,
        &config.jump_strengths,
        config.forcing_offset,
    );
    let params = config.decoupled_params();
    let eta_load = assemble_load(
        grid,
        &config.junctions,
        &params.jump_strengths,
        params.offset,
    );
    Operators {
        grid: *grid,
        h_load: load.iter().map(|f| -f / config.tau).collect(),
        load,
        eta_sigma: params.sigma,
        alpha: config.alpha,
        eta_load,
        h_sigma: config.sigma1 / config.tau,
        zeta_sigma: config.sigma2,
    }
}

impl Operators {
    pub fn from_config(config: &ModelConfig) -> Result<Self> {
        let grid = Grid::new(config.omega, config.numerics.grid_points)?;
        Ok(assemble_operators(&grid, config))
    }

    /// `I / dt + diffusivity S + reaction I`.
    pub fn implicit_matrix(&self, dt: f64, diffusivity: f64, reaction: f64) -> PeriodicTridiagonal {
        let k = diffusivity / (self.grid.dx * self.grid.dx);
        PeriodicTridiagonal::new(self.grid.n, 1.0 / dt + 2.0 * k + reaction, -k)
    }

    /// Solution of `(sigma S + alpha I) eta = F_eff`; requires `alpha > 0`.
    pub fn discrete_stationary(&self) -> Result<Vec<f64>> {
        let k = self.eta_sigma / (self.grid.dx * self.grid.dx);
        PeriodicTridiagonal::new(self.grid.n, 2.0 * k + self.alpha, -k).solve_checked(&self.eta_load)
    }
}
