use crate::error::Result;
use crate::solver::grid::Field;
use crate::solver::operators::Operators;
use crate::solver::tridiag::PeriodicTridiagonal;

/// State of a simulation at one instant.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Decoupled(Field),
    /// Interface height `h` and liquid surface `zeta`; `eta = zeta - h`.
    Coupled { h: Field, zeta: Field },
}

impl State {
    pub fn time(&self) -> f64 {
        match self {
            State::Decoupled(eta) => eta.time,
            State::Coupled { h, .. } => h.time,
        }
    }

    pub fn eta(&self) -> Field {
        match self {
            State::Decoupled(eta) => eta.clone(),
            State::Coupled { h, zeta } => Field::new(
                h.grid,
                zeta.values.iter().zip(&h.values).map(|(z, h)| z - h).collect(),
                h.time,
            ),
        }
    }

    pub fn min_eta(&self) -> f64 {
        match self {
            State::Decoupled(eta) => eta.min(),
            State::Coupled { h, zeta } => zeta
                .values
                .iter()
                .zip(&h.values)
                .map(|(z, h)| z - h)
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn h(&self) -> Option<&Field> {
        match self {
            State::Decoupled(_) => None,
            State::Coupled { h, .. } => Some(h),
        }
    }
}

fn implicit_solve(field: &Field, dt: f64, matrix: &PeriodicTridiagonal, source: impl Fn(usize) -> f64) -> Result<Field> {
    let inv_dt = 1.0 / dt;
    let rhs: Vec<f64> = field
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| v * inv_dt + source(j))
        .collect();
    let values = matrix.solve_checked(&rhs)?;
    Ok(Field::new(field.grid, values, field.time + dt))
}

/// One backward-Euler step of `(I/dt + sigma S + alpha I) eta' = eta / dt + F_eff`.
pub fn step_decoupled(state: &Field, dt: f64, ops: &Operators) -> Result<Field> {
    let m = ops.implicit_matrix(dt, ops.eta_sigma, ops.alpha);
    implicit_solve(state, dt, &m, |j| ops.eta_load[j])
}

/// One step of the coupled system: `h` first (it does not depend on `zeta`),
/// then `zeta` with the updated `h` in the evaporation term.
pub fn step_coupled(h: &Field, zeta: &Field, dt: f64, ops: &Operators) -> Result<(Field, Field)> {
    let mh = ops.implicit_matrix(dt, ops.h_sigma, 0.0);
    let mz = ops.implicit_matrix(dt, ops.zeta_sigma, ops.alpha);
    coupled_with(h, zeta, dt, ops, &mh, &mz)
}

fn coupled_with(
    h: &Field,
    zeta: &Field,
    dt: f64,
    ops: &Operators,
    mh: &PeriodicTridiagonal,
    mz: &PeriodicTridiagonal,
) -> Result<(Field, Field)> {
    let h_next = implicit_solve(h, dt, mh, |j| ops.h_load[j])?;
    let zeta_next = implicit_solve(zeta, dt, mz, |j| ops.alpha * h_next.values[j])?;
    Ok((h_next, zeta_next))
}

/// Backward-Euler stepper that caches the factorizations for its nominal
/// step; other step sizes are factorized on demand.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    ops: &'a Operators,
    dt: f64,
    eta: PeriodicTridiagonal,
    h: PeriodicTridiagonal,
    zeta: PeriodicTridiagonal,
}

impl<'a> Stepper<'a> {
    pub fn new(ops: &'a Operators, dt: f64) -> Self {
        Self {
            ops,
            dt,
            eta: ops.implicit_matrix(dt, ops.eta_sigma, ops.alpha),
            h: ops.implicit_matrix(dt, ops.h_sigma, 0.0),
            zeta: ops.implicit_matrix(dt, ops.zeta_sigma, ops.alpha),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn ops(&self) -> &'a Operators {
        self.ops
    }

    pub fn step(&self, state: &State) -> Result<State> {
        match state {
            State::Decoupled(eta) => Ok(State::Decoupled(implicit_solve(eta, self.dt, &self.eta, |j| {
                self.ops.eta_load[j]
            })?)),
            State::Coupled { h, zeta } => {
                let (h, zeta) = coupled_with(h, zeta, self.dt, self.ops, &self.h, &self.zeta)?;
                Ok(State::Coupled { h, zeta })
            }
        }
    }

    pub fn step_by(&self, state: &State, dt: f64) -> Result<State> {
        if dt == self.dt {
            return self.step(state);
        }
        match state {
            State::Decoupled(eta) => Ok(State::Decoupled(step_decoupled(eta, dt, self.ops)?)),
            State::Coupled { h, zeta } => {
                let (h, zeta) = step_coupled(h, zeta, dt, self.ops)?;
                Ok(State::Coupled { h, zeta })
            }
        }
    }
}

/// Steps of size `dt` up to `t_end`, shortening the last one to land on it.
pub fn evolve(state: &State, t_end: f64, dt: f64, ops: &Operators) -> Result<State> {
    let stepper = Stepper::new(ops, dt);
    let mut current = state.clone();
    while current.time() < t_end {
        let remaining = t_end - current.time();
        current = if remaining <= dt * (1.0 + 1e-9) {
            let mut next = stepper.step_by(&current, remaining)?;
            set_time(&mut next, t_end);
            next
        } else {
            stepper.step(&current)?
        };
    }
    Ok(current)
}

pub(crate) fn set_time(state: &mut State, t: f64) {
    match state {
        State::Decoupled(eta) => eta.time = t,
        State::Coupled { h, zeta } => {
            h.time = t;
            zeta.time = t;
        }
    }
}
