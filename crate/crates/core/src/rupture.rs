//! Threshold crossings, rupture sets, resets, and the rupture-punctuated
//! evolution.

use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::solver::{set_time, Field, Operators, State, Stepper};

#[derive(Debug, Clone, PartialEq)]
pub struct RuptureEvent {
    /// 1-based event counter.
    pub index: usize,
    pub time: f64,
    pub rupture_nodes: Vec<usize>,
    pub reset_intervals: Vec<usize>,
    pub min_eta: f64,
    /// State at the located rupture time, before the reset.
    pub pre: State,
    pub post: State,
}

impl RuptureEvent {
    pub fn pre_profile(&self) -> Field {
        self.pre.eta()
    }

    pub fn post_profile(&self) -> Field {
        self.post.eta()
    }

    pub fn pre_h(&self) -> Option<&Field> {
        self.pre.h()
    }

    pub fn post_h(&self) -> Option<&Field> {
        self.post.h()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub t_lower: f64,
    pub t_upper: f64,
    pub lower_applicable: bool,
    pub upper_applicable: bool,
}

/// Lower bound from the spatially constant subsolution
/// `xi(t) = A (e^{-alpha t} - 1) / alpha + inf(eta0) e^{-alpha t}` and upper
/// bound from the decay of the mean, for the decoupled equation.
pub fn rupture_time_bounds(config: &ModelConfig, eta0: &Field) -> Result<BoundsReport> {
    let params = config.decoupled_params();
    let alpha = params.alpha;
    if alpha <= 0.0 {
        return Err(Error::Domain(
            "rupture-time bounds need alpha > 0".into(),
        ));
    }
    let a = params.offset;
    let inf = eta0.min();
    let mean = eta0.mean();
    let t_lower = ((a / alpha + inf) / (a / alpha + config.eta_c)).ln() / alpha;
    let t_upper = -(config.eta_c / mean).ln() / alpha;
    let integral_f = params.total_jump() - a * config.omega;
    Ok(BoundsReport {
        t_lower,
        t_upper,
        lower_applicable: params.jump_strengths.iter().all(|&c| c >= 0.0)
            && a >= 0.0
            && inf > config.eta_c,
        upper_applicable: integral_f <= 0.0 && mean > config.eta_c,
    })
}

fn event_tolerance(config: &ModelConfig) -> f64 {
    config.numerics.event_tol * config.eta_a
}

/// Bisects a single implicit sub-step from `pre` until the minimum of `eta`
/// is within the event tolerance of `eta_c`, or the bracket shrinks below
/// `1e-3 dt`. Returns the located offset in `(0, dt]` and the state there.
pub fn locate_crossing(
    pre: &State,
    dt: f64,
    ops: &Operators,
    config: &ModelConfig,
) -> Result<(f64, State)> {
    locate_with(&Stepper::new(ops, dt), pre, dt, config)
}

fn locate_with(stepper: &Stepper<'_>, pre: &State, dt: f64, config: &ModelConfig) -> Result<(f64, State)> {
    let eta_c = config.eta_c;
    let tol = event_tolerance(config);
    let start = pre.min_eta();
    if !(start > eta_c) {
        return Err(Error::Bracket(format!(
            "minimum {start:e} at the start of the step is not above eta_c"
        )));
    }
    let full = stepper.step_by(pre, dt)?;
    let end = full.min_eta();
    if end > eta_c {
        return Err(Error::Bracket(format!(
            "minimum {end:e} after the step is still above eta_c"
        )));
    }
    if (end - eta_c).abs() <= tol {
        return Ok((dt, full));
    }

    let (mut lo, mut hi) = (0.0, dt);
    let mut best = full;
    while hi - lo >= 1e-3 * dt {
        let mid = 0.5 * (lo + hi);
        let trial = stepper.step_by(pre, mid)?;
        let m = trial.min_eta();
        if (m - eta_c).abs() <= tol {
            return Ok((mid, trial));
        }
        if m > eta_c {
            lo = mid;
        } else {
            hi = mid;
            best = trial;
        }
    }
    Ok((hi, best))
}

/// Nodes whose value is within the event tolerance of the threshold.
pub fn rupture_nodes(at_rupture: &Field, config: &ModelConfig) -> Vec<usize> {
    let level = config.eta_c + event_tolerance(config);
    at_rupture
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v <= level)
        .map(|(j, _)| j)
        .collect()
}

/// Sorted indices of the intervals `[a_k, a_{k+1})` holding a rupture node.
pub fn rupture_intervals(at_rupture: &Field, config: &ModelConfig) -> Result<Vec<usize>> {
    let nodes = rupture_nodes(at_rupture, config);
    if nodes.is_empty() {
        return Err(Error::EmptyRuptureSet {
            min_eta: at_rupture.min(),
        });
    }
    let mut intervals: Vec<usize> = nodes
        .iter()
        .map(|&j| config.interval_of(at_rupture.grid.node(j)))
        .collect();
    intervals.sort_unstable();
    intervals.dedup();
    Ok(intervals)
}

fn reset_mask(grid_nodes: impl Iterator<Item = f64>, intervals: &[usize], config: &ModelConfig) -> Vec<bool> {
    grid_nodes
        .map(|x| intervals.contains(&config.interval_of(x)))
        .collect()
}

/// Sets `eta = eta_a` on every node of the listed half-open intervals. In
/// coupled mode `h` drops by `d` there and `zeta` becomes `h + eta_a`.
pub fn apply_reset(state: &State, intervals: &[usize], config: &ModelConfig) -> State {
    match state {
        State::Decoupled(eta) => {
            let mask = reset_mask(eta.grid.nodes(), intervals, config);
            let mut out = eta.clone();
            for (v, reset) in out.values.iter_mut().zip(mask) {
                if reset {
                    *v = config.eta_a;
                }
            }
            State::Decoupled(out)
        }
        State::Coupled { h, zeta } => {
            let mask = reset_mask(h.grid.nodes(), intervals, config);
            let mut h = h.clone();
            let mut zeta = zeta.clone();
            for ((hv, zv), reset) in h.values.iter_mut().zip(zeta.values.iter_mut()).zip(mask) {
                if reset {
                    *hv -= config.d;
                    *zv = *hv + config.eta_a;
                }
            }
            State::Coupled { h, zeta }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stop {
    pub max_events: Option<usize>,
    pub t_end: Option<f64>,
}

impl Stop {
    pub fn events(n: usize) -> Self {
        Self {
            max_events: Some(n),
            t_end: None,
        }
    }

    pub fn until(t_end: f64) -> Self {
        Self {
            max_events: None,
            t_end: Some(t_end),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RuptureRun {
    pub events: Vec<RuptureEvent>,
    pub final_state: State,
}

/// Evolves with resets until `stop` is met. Without any stop criterion the
/// run ends after `numerics.max_ruptures` events.
pub fn run_with_rupture(
    config: &ModelConfig,
    ops: &Operators,
    initial: &State,
    stop: Stop,
) -> Result<RuptureRun> {
    let max_events = match stop {
        Stop {
            max_events: None,
            t_end: None,
        } => Some(config.numerics.max_ruptures),
        Stop { max_events, .. } => max_events,
    };
    let start_min = initial.min_eta();
    if !(start_min > config.eta_c) {
        return Err(Error::Domain(format!(
            "initial minimum {start_min:e} must exceed eta_c = {:e}",
            config.eta_c
        )));
    }

    let dt = config.numerics.dt;
    let stepper = Stepper::new(ops, dt);
    let mut events: Vec<RuptureEvent> = Vec::new();
    let mut current = initial.clone();

    loop {
        if max_events.is_some_and(|m| events.len() >= m) {
            break;
        }
        let mut step = dt;
        let mut landing = None;
        if let Some(t_end) = stop.t_end {
            let remaining = t_end - current.time();
            if remaining <= 0.0 {
                break;
            }
            if remaining <= dt * (1.0 + 1e-9) {
                step = remaining;
                landing = Some(t_end);
            }
        }
        let mut next = stepper.step_by(&current, step)?;
        if next.min_eta() > config.eta_c {
            if let Some(t) = landing {
                set_time(&mut next, t);
            }
            current = next;
            continue;
        }

        let (_, at) = locate_with(&stepper, &current, step, config)?;
        let eta = at.eta();
        let nodes = rupture_nodes(&eta, config);
        let intervals = rupture_intervals(&eta, config)?;
        let time = at.time();
        if let Some(prev) = events.last() {
            if time - prev.time < dt {
                return Err(Error::Stagnation {
                    previous: prev.time,
                    current: time,
                });
            }
        }
        let post = apply_reset(&at, &intervals, config);
        events.push(RuptureEvent {
            index: events.len() + 1,
            time,
            rupture_nodes: nodes,
            reset_intervals: intervals,
            min_eta: eta.min(),
            pre: at,
            post: post.clone(),
        });
        current = post;
    }

    Ok(RuptureRun {
        events,
        final_state: current,
    })
}
