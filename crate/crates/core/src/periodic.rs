//! Rupture-to-rupture return map, fixed-point search, periodicity check and
//! the derivative-estimate probe.

use serde::{Deserialize, Serialize};

use crate::config::{validate, Mode, ModelConfig};
use crate::error::{Error, Result};
use crate::rupture::{run_with_rupture, RuptureEvent, Stop};
use crate::solver::{evolve, hat_weights, Field, Operators, State};
use crate::stationary::{check_condition_s, solve_stationary, SReport, StationaryProfile};

/// Return map on profiles outside the distinguished interval `(a_i, a_{i+1})`.
#[derive(Debug, Clone)]
pub struct PoincareMap {
    pub config: ModelConfig,
    pub ops: Operators,
    pub profile: StationaryProfile,
    pub s_report: SReport,
    /// Distinguished interval `i`.
    pub interval: usize,
    /// Upper offset of the invariant set `s <= xi <= s + B`.
    pub bound: f64,
    /// Closed-form `s` at the nodes.
    s_nodes: Vec<f64>,
    /// Nodes outside the open interval `(a_i, a_{i+1})`.
    outside: Vec<bool>,
    /// `max |s - eta*|` between the closed form and the discrete stationary
    /// state; membership checks allow this much slack.
    discretization_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub m: usize,
    pub t_r: f64,
    pub sup_diff: f64,
    /// Whether the iterate stayed in the invariant set (decoupled mode).
    pub in_invariant_set: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct IterateProfiles {
    /// Initial data handed to the evolution (spliced in decoupled mode).
    pub start: Field,
    /// Profile at the rupture time.
    pub at_rupture: Field,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub iterates: Vec<IterateRecord>,
    pub converged: bool,
    pub period: f64,
    pub fixed_profile: Field,
    pub interval: Option<usize>,
    pub condition_s_holds: bool,
    pub history: Vec<IterateProfiles>,
}

impl PoincareMap {
    /// Requires condition (C). The distinguished interval is the one where
    /// `s` reaches `eta_c`, or the interval holding the deepest point of `s`
    /// when that is not unique; rupture elsewhere surfaces as a model
    /// violation from [`PoincareMap::apply`].
    pub fn new(config: &ModelConfig) -> Result<Self> {
        if config.mode != Mode::Decoupled {
            return Err(Error::Unsupported(
                "the return map is defined for the decoupled equation".into(),
            ));
        }
        let validation = validate(config);
        if !validation.condition_c_holds {
            return Err(Error::Domain(format!(
                "condition (C) fails: {}",
                validation.messages.join("; ")
            )));
        }
        let profile = solve_stationary(config)?;
        let s_report = check_condition_s(&profile, config)?;
        let interval = match (s_report.threshold_localized, s_report.rupture_interval_index) {
            (true, Some(i)) => i,
            _ => profile.deepest_interval(),
        };
        let ops = Operators::from_config(config)?;
        let s_nodes = profile.sample(ops.grid.nodes());
        let outside = ops
            .grid
            .nodes()
            .map(|x| !config.in_open_interval(x, interval))
            .collect();
        let star = ops.discrete_stationary()?;
        let discretization_gap = crate::solver::sup_diff(&star, &s_nodes);
        let bound = config.eta_a - profile.inf() + 1.0;
        Ok(Self {
            config: config.clone(),
            ops,
            profile,
            s_report,
            interval,
            bound,
            s_nodes,
            outside,
            discretization_gap,
        })
    }

    pub fn condition_s_holds(&self) -> bool {
        self.s_report.condition_s_holds
    }

    pub fn stationary_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    pub fn outside_mask(&self) -> &[bool] {
        &self.outside
    }

    /// `eta_a` inside `(a_i, a_{i+1})`, `xi` elsewhere; time reset to 0.
    pub fn splice(&self, xi: &Field) -> Field {
        let values = xi
            .values
            .iter()
            .zip(&self.outside)
            .map(|(&v, &out)| if out { v } else { self.config.eta_a })
            .collect();
        Field::new(xi.grid, values, 0.0)
    }

    /// Sup norm of `a - b` over nodes outside the distinguished interval.
    pub fn outside_diff(&self, a: &Field, b: &Field) -> f64 {
        a.values
            .iter()
            .zip(&b.values)
            .zip(&self.outside)
            .filter(|(_, &out)| out)
            .fold(0.0, |m, ((x, y), _)| m.max((x - y).abs()))
    }

    /// Nodal membership in `{ s <= xi <= s + B }` outside the interval.
    pub fn in_invariant_set(&self, xi: &Field) -> bool {
        let slack = self.discretization_gap + 1e-12;
        xi.values
            .iter()
            .zip(&self.s_nodes)
            .zip(&self.outside)
            .filter(|(_, &out)| out)
            .all(|((v, s), _)| *v >= s - slack && *v <= s + self.bound + slack)
    }

    fn first_event(&self, start: &Field) -> Result<RuptureEvent> {
        let run = run_with_rupture(
            &self.config,
            &self.ops,
            &State::Decoupled(start.clone()),
            Stop::events(1),
        )?;
        let event = run
            .events
            .into_iter()
            .next()
            .expect("a one-event run yields one event");
        if event.reset_intervals != [self.interval] {
            return Err(Error::ModelViolation {
                expected: self.interval,
                found: event.reset_intervals,
                time: event.time,
            });
        }
        Ok(event)
    }

    /// `(T xi, t_r(xi))`.
    pub fn apply(&self, xi: &Field) -> Result<(Field, f64)> {
        let event = self.first_event(&self.splice(xi))?;
        Ok((event.pre_profile(), event.time))
    }
}

pub fn poincare_map(xi: &Field, config: &ModelConfig) -> Result<(Field, f64)> {
    PoincareMap::new(config)?.apply(xi)
}

/// Picard iteration of the return map (decoupled mode), or event-to-event
/// comparison of pre-rupture profiles (coupled mode).
pub fn find_periodic(
    config: &ModelConfig,
    xi0: &State,
    fp_tol: f64,
    max_iter: usize,
) -> Result<ConvergenceReport> {
    match config.mode {
        Mode::Decoupled => {
            let map = PoincareMap::new(config)?;
            let xi = xi0.eta();
            map.iterate(&xi, fp_tol, max_iter)
        }
        Mode::Coupled => find_periodic_coupled(config, xi0, fp_tol, max_iter),
    }
}

impl PoincareMap {
    pub fn iterate(&self, xi0: &Field, fp_tol: f64, max_iter: usize) -> Result<ConvergenceReport> {
        let mut xi = xi0.clone();
        let mut iterates = Vec::new();
        let mut history = Vec::new();
        let mut converged = false;
        let mut period = f64::NAN;
        for m in 1..=max_iter {
            let start = self.splice(&xi);
            let event = self.first_event(&start)?;
            let next = event.pre_profile();
            let sup_diff = self.outside_diff(&next, &xi);
            iterates.push(IterateRecord {
                m,
                t_r: event.time,
                sup_diff,
                in_invariant_set: Some(self.in_invariant_set(&next)),
            });
            history.push(IterateProfiles {
                start,
                at_rupture: next.clone(),
            });
            period = event.time;
            xi = next;
            if sup_diff <= fp_tol {
                converged = true;
                break;
            }
        }
        Ok(ConvergenceReport {
            iterates,
            converged,
            period,
            fixed_profile: xi,
            interval: Some(self.interval),
            condition_s_holds: self.condition_s_holds(),
            history,
        })
    }
}

fn find_periodic_coupled(
    config: &ModelConfig,
    initial: &State,
    fp_tol: f64,
    max_iter: usize,
) -> Result<ConvergenceReport> {
    let ops = Operators::from_config(config)?;
    let mut iterates = Vec::new();
    let mut history = Vec::new();
    let mut converged = false;
    let mut period = f64::NAN;
    let mut state = initial.clone();
    let mut previous = initial.eta();
    for m in 1..=max_iter {
        let start_time = state.time();
        let run = run_with_rupture(config, &ops, &state, Stop::events(1))?;
        let event = run.events.into_iter().next().expect("one event");
        let pre = event.pre_profile();
        let sup_diff = crate::solver::sup_diff(&pre.values, &previous.values);
        period = event.time - start_time;
        iterates.push(IterateRecord {
            m,
            t_r: period,
            sup_diff,
            in_invariant_set: None,
        });
        history.push(IterateProfiles {
            start: state.eta(),
            at_rupture: pre.clone(),
        });
        previous = pre;
        state = event.post;
        if sup_diff <= fp_tol {
            converged = true;
            break;
        }
    }
    Ok(ConvergenceReport {
        iterates,
        converged,
        period,
        fixed_profile: previous,
        interval: None,
        condition_s_holds: false,
        history,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub periodic: bool,
    pub gaps: Vec<f64>,
    /// `|P1 - xi*|` outside the interval, then `|P2 - P1|` on the whole grid.
    pub profile_diffs: Vec<f64>,
}

/// Runs two further events from the spliced profile and compares both
/// rupture profiles with the input and with each other.
pub fn verify_periodic(config: &ModelConfig, fixed_profile: &Field, tol: f64) -> Result<VerifyReport> {
    PoincareMap::new(config)?.verify(fixed_profile, tol)
}

impl PoincareMap {
    pub fn verify(&self, fixed_profile: &Field, tol: f64) -> Result<VerifyReport> {
        let start = State::Decoupled(self.splice(fixed_profile));
        let run = run_with_rupture(&self.config, &self.ops, &start, Stop::events(2))?;
        let [first, second] = run.events.as_slice() else {
            return Ok(VerifyReport {
                periodic: false,
                gaps: vec![],
                profile_diffs: vec![],
            });
        };
        let gaps = vec![first.time, second.time - first.time];
        let p1 = first.pre_profile();
        let p2 = second.pre_profile();
        let diffs = vec![
            self.outside_diff(&p1, fixed_profile),
            crate::solver::sup_diff(&p1.values, &p2.values),
        ];
        let dt = self.config.numerics.dt;
        let periodic = (gaps[0] - gaps[1]).abs() <= 2.0 * dt && diffs.iter().all(|d| *d <= tol);
        Ok(VerifyReport {
            periodic,
            gaps,
            profile_diffs: diffs,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientSample {
    pub t: f64,
    pub sup_gradient: f64,
    pub bound_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientProbe {
    pub samples: Vec<GradientSample>,
    /// Coefficient of `|eta0|_inf / sqrt(t)`.
    pub c0: f64,
    /// Coefficient of `sum |c_k|`.
    pub c1: f64,
}

/// Sup norm of the nodal derivative: centered differences, except one-sided
/// at the two nodes bracketing each junction (where the slope jumps).
pub fn sup_gradient(field: &Field, junctions: &[f64]) -> f64 {
    let grid = field.grid;
    let n = grid.n;
    // -1: backward difference, +1: forward difference
    let mut side = vec![0i8; n];
    for &a in junctions {
        let [(left, _), (right, theta)] = hat_weights(&grid, a);
        if theta == 0.0 {
            // junction sits on node `left`: right derivative there
            side[(left + n - 1) % n] = -1;
            side[left] = 1;
        } else {
            side[left] = -1;
            side[right] = 1;
        }
    }
    let v = &field.values;
    (0..n)
        .map(|j| {
            let prev = v[(j + n - 1) % n];
            let next = v[(j + 1) % n];
            let d = match side[j] {
                -1 => (v[j] - prev) / grid.dx,
                1 => (next - v[j]) / grid.dx,
                _ => (next - prev) / (2.0 * grid.dx),
            };
            d.abs()
        })
        .fold(0.0, f64::max)
}

/// Probes the derivative estimate `|d_x S(t) eta0| <= C0 |eta0| / sqrt(t) +
/// C1 sum |c_k|`.
///
/// The stepper is linear, so the solution splits into the unforced
/// evolution of `eta0` and the forced evolution from zero. `C0` is the
/// smallest constant bounding the first part and `C1` the smallest bounding
/// the second; their sum then bounds the full derivative.
pub fn gradient_probe(config: &ModelConfig, eta0: &Field, times: &[f64]) -> Result<GradientProbe> {
    if config.mode != Mode::Decoupled {
        return Err(Error::Unsupported(
            "the gradient probe applies to the decoupled equation".into(),
        ));
    }
    if times.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Domain("probe times must be positive".into()));
    }
    let dt = config.numerics.dt;
    let params = config.decoupled_params();
    let forcing: f64 = params.jump_strengths.iter().map(|c| c.abs()).sum();
    let norm0 = eta0.sup_norm();

    let full = Operators::from_config(config)?;
    let mut unforced = full.clone();
    unforced.eta_load.iter_mut().for_each(|v| *v = 0.0);

    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));

    let mut hom = State::Decoupled(Field::new(eta0.grid, eta0.values.clone(), 0.0));
    let mut forced = State::Decoupled(Field::constant(eta0.grid, 0.0));
    let mut parts = vec![(0.0, 0.0, 0.0); times.len()];
    for &i in &order {
        let t = times[i];
        hom = evolve(&hom, t, dt, &unforced)?;
        forced = evolve(&forced, t, dt, &full)?;
        let g_hom = sup_gradient(&hom.eta(), &config.junctions);
        let g_forced = sup_gradient(&forced.eta(), &config.junctions);
        let total: Vec<f64> = hom
            .eta()
            .values
            .iter()
            .zip(&forced.eta().values)
            .map(|(a, b)| a + b)
            .collect();
        let g_total = sup_gradient(&Field::new(eta0.grid, total, t), &config.junctions);
        parts[i] = (g_hom, g_forced, g_total);
    }

    let c0 = if norm0 > 0.0 {
        times
            .iter()
            .zip(&parts)
            .map(|(t, p)| p.0 * t.sqrt() / norm0)
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    let c1 = if forcing > 0.0 {
        parts.iter().map(|p| p.1 / forcing).fold(0.0, f64::max)
    } else {
        0.0
    };
    let samples = times
        .iter()
        .zip(&parts)
        .map(|(&t, p)| GradientSample {
            t,
            sup_gradient: p.2,
            bound_value: c0 * norm0 / t.sqrt() + c1 * forcing,
        })
        .collect();
    Ok(GradientProbe { samples, c0, c1 })
}
