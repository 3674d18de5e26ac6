//! Closed-form stationary profile of the decoupled thickness equation
//! `sigma s'' - alpha s = A` between junctions, with slope jumps
//! `s'(a_k + 0) - s'(a_k - 0) = -c_k / sigma`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::error::{Error, Result};

/// Functional form of the profile on each interval, in the local coordinate
/// `u = x - a_k` with `u` in `[0, L_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Branch {
    /// `s = offset + p e^{-lambda (L_k - u)} + q e^{-lambda u}`.
    ///
    /// Each exponential is anchored at the end where it peaks so neither
    /// term exceeds its coefficient inside the interval.
    Exponential { lambda: f64, offset: f64 },
    /// `s = curvature u^2 / 2 + p u + q` (the `alpha = 0` family, fixed to
    /// zero mean).
    Quadratic { curvature: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryProfile {
    pub omega: f64,
    pub junctions: Vec<f64>,
    pub lengths: Vec<f64>,
    pub branch: Branch,
    /// Per-interval `(p_k, q_k)`; meaning depends on [`Branch`].
    pub coeffs: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SReport {
    pub rupture_interval_index: Option<usize>,
    pub min_per_interval: Vec<(usize, f64)>,
    pub max_per_interval: Vec<(usize, f64)>,
    pub condition_s_holds: bool,
    /// `s > eta_c` outside exactly one interval (the first half of (S)).
    pub threshold_localized: bool,
    pub eta_a_clearance: bool,
    /// Whether `min s < eta_c` strictly inside the distinguished interval.
    pub dips_below_threshold: bool,
}

fn lengths_of(config: &ModelConfig) -> Vec<f64> {
    (0..config.interval_count())
        .map(|k| config.interval_length(k))
        .collect()
}

pub fn solve_stationary(config: &ModelConfig) -> Result<StationaryProfile> {
    let params = config.decoupled_params();
    if params.alpha == 0.0 {
        return Err(Error::Unsupported(
            "alpha = 0 has no exponential stationary profile; use solve_stationary_alpha0".into(),
        ));
    }
    let sigma = params.sigma;
    let lambda = (params.alpha / sigma).sqrt();
    let lengths = lengths_of(config);
    let k_count = lengths.len();
    let decay: Vec<f64> = lengths.iter().map(|l| (-lambda * l).exp()).collect();

    // Unknowns: p_k at 2k, q_k at 2k + 1. Rows: continuity then slope jump
    // at each junction k, between interval k-1 (left) and k (right).
    let dim = 2 * k_count;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    for k in 0..k_count {
        let left = (k + k_count - 1) % k_count;
        let cont = 2 * k;
        let jump = 2 * k + 1;
        m[(cont, 2 * left)] += 1.0;
        m[(cont, 2 * left + 1)] += decay[left];
        m[(cont, 2 * k)] -= decay[k];
        m[(cont, 2 * k + 1)] -= 1.0;

        m[(jump, 2 * k)] += lambda * decay[k];
        m[(jump, 2 * k + 1)] -= lambda;
        m[(jump, 2 * left)] -= lambda;
        m[(jump, 2 * left + 1)] += lambda * decay[left];
        rhs[jump] = -params.jump_strengths[k] / sigma;
    }

    let solution = m
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular {
            residual: f64::INFINITY,
        })?;
    let residual = (&m * &solution - &rhs).amax();
    if !(residual <= 1e-8 * (1.0 + rhs.amax())) {
        return Err(Error::Singular { residual });
    }

    Ok(StationaryProfile {
        omega: config.omega,
        junctions: config.junctions.clone(),
        lengths,
        branch: Branch::Exponential {
            lambda,
            offset: -params.offset / params.alpha,
        },
        coeffs: (0..k_count)
            .map(|k| (solution[2 * k], solution[2 * k + 1]))
            .collect(),
    })
}

pub fn solve_stationary_alpha0(config: &ModelConfig) -> Result<StationaryProfile> {
    let params = config.decoupled_params();
    if params.alpha != 0.0 {
        return Err(Error::Unsupported(
            "solve_stationary_alpha0 requires alpha = 0".into(),
        ));
    }
    let total = params.total_jump();
    let balance = total / config.omega;
    if (params.offset - balance).abs() > 1e-12 * params.offset.abs().max(balance.abs()) {
        return Err(Error::NoSolution(format!(
            "with alpha = 0 the offset must equal sum(c)/omega = {balance}, got {}",
            params.offset
        )));
    }
    let sigma = params.sigma;
    let curvature = params.offset / sigma;
    let lengths = lengths_of(config);
    let k_count = lengths.len();

    // slopes: p_k = p_0 + shift_k, marching the jump condition rightwards
    let mut shift = vec![0.0; k_count];
    for k in 1..k_count {
        shift[k] = shift[k - 1] + curvature * lengths[k - 1] - params.jump_strengths[k] / sigma;
    }
    // periodicity: the rises over all intervals sum to zero
    let rise: f64 = (0..k_count)
        .map(|k| 0.5 * curvature * lengths[k].powi(2) + shift[k] * lengths[k])
        .sum();
    let p0 = -rise / config.omega;
    let slopes: Vec<f64> = shift.iter().map(|s| p0 + s).collect();

    let mut level = vec![0.0; k_count];
    for k in 1..k_count {
        let l = lengths[k - 1];
        level[k] = level[k - 1] + 0.5 * curvature * l * l + slopes[k - 1] * l;
    }
    let integral: f64 = (0..k_count)
        .map(|k| {
            let l = lengths[k];
            curvature * l.powi(3) / 6.0 + slopes[k] * l * l / 2.0 + level[k] * l
        })
        .sum();
    let q0 = -integral / config.omega;

    Ok(StationaryProfile {
        omega: config.omega,
        junctions: config.junctions.clone(),
        lengths,
        branch: Branch::Quadratic { curvature },
        coeffs: slopes
            .into_iter()
            .zip(level)
            .map(|(p, q)| (p, q + q0))
            .collect(),
    })
}

/// Picks the exponential or quadratic branch from `alpha`.
pub fn stationary_for(config: &ModelConfig) -> Result<StationaryProfile> {
    if config.alpha == 0.0 {
        solve_stationary_alpha0(config)
    } else {
        solve_stationary(config)
    }
}

pub fn eval_stationary(profile: &StationaryProfile, x: f64) -> f64 {
    profile.value(x)
}

impl StationaryProfile {
    pub fn interval_count(&self) -> usize {
        self.junctions.len()
    }

    pub fn is_alpha_zero(&self) -> bool {
        matches!(self.branch, Branch::Quadratic { .. })
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let x = x.rem_euclid(self.omega);
        let count = self.junctions.partition_point(|&a| a <= x);
        let k = if count == 0 {
            self.junctions.len() - 1
        } else {
            count - 1
        };
        (k, (x - self.junctions[k]).rem_euclid(self.omega))
    }

    /// Value on interval `k` at local offset `u` (valid on the closure).
    pub fn interval_value(&self, k: usize, u: f64) -> f64 {
        let (p, q) = self.coeffs[k];
        match self.branch {
            Branch::Exponential { lambda, offset } => {
                let l = self.lengths[k];
                offset + p * (-lambda * (l - u)).exp() + q * (-lambda * u).exp()
            }
            Branch::Quadratic { curvature } => 0.5 * curvature * u * u + p * u + q,
        }
    }

    pub fn interval_derivative(&self, k: usize, u: f64) -> f64 {
        let (p, q) = self.coeffs[k];
        match self.branch {
            Branch::Exponential { lambda, .. } => {
                let l = self.lengths[k];
                lambda * (p * (-lambda * (l - u)).exp() - q * (-lambda * u).exp())
            }
            Branch::Quadratic { curvature } => curvature * u + p,
        }
    }

    pub fn interval_second_derivative(&self, k: usize, u: f64) -> f64 {
        let (p, q) = self.coeffs[k];
        match self.branch {
            Branch::Exponential { lambda, .. } => {
                let l = self.lengths[k];
                lambda * lambda * (p * (-lambda * (l - u)).exp() + q * (-lambda * u).exp())
            }
            Branch::Quadratic { curvature } => curvature,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let (k, u) = self.locate(x);
        self.interval_value(k, u)
    }

    /// Right derivative at `x`.
    pub fn derivative(&self, x: f64) -> f64 {
        let (k, u) = self.locate(x);
        self.interval_derivative(k, u)
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let (k, u) = self.locate(x);
        self.interval_second_derivative(k, u)
    }

    /// `s'(a_k + 0) - s'(a_k - 0)`.
    pub fn slope_jump(&self, k: usize) -> f64 {
        let n = self.interval_count();
        let left = (k + n - 1) % n;
        self.interval_derivative(k, 0.0) - self.interval_derivative(left, self.lengths[left])
    }

    /// `s(a_k + 0) - s(a_k - 0)`.
    pub fn value_jump(&self, k: usize) -> f64 {
        let n = self.interval_count();
        let left = (k + n - 1) % n;
        self.interval_value(k, 0.0) - self.interval_value(left, self.lengths[left])
    }

    /// Exact integral over one period.
    pub fn integral(&self) -> f64 {
        (0..self.interval_count())
            .map(|k| {
                let l = self.lengths[k];
                let (p, q) = self.coeffs[k];
                match self.branch {
                    Branch::Exponential { lambda, offset } => {
                        let w = (1.0 - (-lambda * l).exp()) / lambda;
                        offset * l + (p + q) * w
                    }
                    Branch::Quadratic { curvature } => {
                        curvature * l.powi(3) / 6.0 + p * l * l / 2.0 + q * l
                    }
                }
            })
            .sum()
    }

    /// Candidate abscissae (local) for extrema on the closure of interval `k`.
    fn extremum_candidates(&self, k: usize) -> Vec<f64> {
        let l = self.lengths[k];
        let (p, q) = self.coeffs[k];
        let mut us = vec![0.0, l];
        let critical = match self.branch {
            Branch::Exponential { lambda, .. } => {
                if p != 0.0 && q / p > 0.0 {
                    Some(((q / p).ln() + lambda * l) / (2.0 * lambda))
                } else {
                    None
                }
            }
            Branch::Quadratic { curvature } => {
                if curvature != 0.0 {
                    Some(-p / curvature)
                } else {
                    None
                }
            }
        };
        if let Some(u) = critical {
            if u > 0.0 && u < l {
                us.push(u);
            }
        }
        us
    }

    /// Exact `(min, max)` of the profile over the closed interval `k`.
    pub fn interval_extrema(&self, k: usize) -> (f64, f64) {
        self.extremum_candidates(k)
            .into_iter()
            .map(|u| self.interval_value(k, u))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Interval holding the global minimum of the profile.
    pub fn deepest_interval(&self) -> usize {
        (0..self.interval_count())
            .map(|k| (k, self.interval_extrema(k).0))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(k, _)| k)
            .unwrap_or(0)
    }

    pub fn inf(&self) -> f64 {
        (0..self.interval_count())
            .map(|k| self.interval_extrema(k).0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn sample(&self, nodes: impl IntoIterator<Item = f64>) -> Vec<f64> {
        nodes.into_iter().map(|x| self.value(x)).collect()
    }
}

pub fn check_condition_s(profile: &StationaryProfile, config: &ModelConfig) -> Result<SReport> {
    if profile.is_alpha_zero() {
        return Err(Error::Unsupported(
            "condition (S) depends on the additive constant, which is arbitrary when alpha = 0"
                .into(),
        ));
    }
    let k_count = profile.interval_count();
    let extrema: Vec<(f64, f64)> = (0..k_count).map(|k| profile.interval_extrema(k)).collect();
    let min_per_interval: Vec<(usize, f64)> =
        extrema.iter().enumerate().map(|(k, e)| (k, e.0)).collect();
    let max_per_interval: Vec<(usize, f64)> =
        extrema.iter().enumerate().map(|(k, e)| (k, e.1)).collect();

    let below: Vec<usize> = (0..k_count)
        .filter(|&k| extrema[k].0 <= config.eta_c)
        .collect();
    let index = match below.as_slice() {
        [i] => Some(*i),
        _ => None,
    };

    let (localized, clearance, dips) = match index {
        Some(i) => {
            let complement_min = if k_count == 1 {
                profile.interval_value(0, 0.0)
            } else {
                (0..k_count)
                    .filter(|&k| k != i)
                    .map(|k| extrema[k].0)
                    .fold(f64::INFINITY, f64::min)
            };
            let clearance = extrema[i].1 < config.eta_a;
            let dips = extrema[i].0 < config.eta_c;
            (complement_min > config.eta_c, clearance, dips)
        }
        None => (false, false, false),
    };

    Ok(SReport {
        rupture_interval_index: index,
        min_per_interval,
        max_per_interval,
        condition_s_holds: localized && clearance,
        threshold_localized: localized,
        eta_a_clearance: clearance,
        dips_below_threshold: dips,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelConfig;

    fn single_delta(alpha: f64, offset: f64) -> ModelConfig {
        let mut c = ModelConfig::preset("ex1").unwrap();
        c.junctions = vec![0.0];
        c.jump_strengths = vec![1.0];
        c.forcing_offset = offset;
        c.alpha = alpha;
        c
    }

    // Independent closed form for one delta: by symmetry about the midpoint
    // s = -A/alpha + C cosh(lambda (x - 1/2)), and the slope jump at 0 gives
    // 2 C lambda sinh(lambda / 2) = c / sigma.
    fn single_delta_oracle(x: f64) -> f64 {
        let c = 1.0 / (2.0 * 0.5f64.sinh());
        -1.0 + c * (x - 0.5).cosh()
    }

    #[test]
    fn single_delta_matches_cosh_form() {
        let p = solve_stationary(&single_delta(1.0, 1.0)).unwrap();
        let c = 1.0 / (2.0 * 0.5f64.sinh());
        assert!((c - 0.959_517_376).abs() < 1e-9);
        assert!((c * 2.0 * 0.5f64.sinh() - 1.0).abs() < 1e-15);
        assert!((p.value(0.0) - 0.081_976_707).abs() < 1e-9);
        assert!((eval_stationary(&p, 0.5) - -0.040_482_624).abs() < 1e-9);
        for i in 0..200 {
            let x = i as f64 / 200.0;
            assert!((p.value(x) - single_delta_oracle(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_forcing_gives_zero_profile() {
        let mut c = ModelConfig::preset("ex1").unwrap();
        c.jump_strengths = vec![0.0; 3];
        c.forcing_offset = 0.0;
        let p = solve_stationary(&c).unwrap();
        assert!(p.coeffs.iter().all(|&(a, b)| a == 0.0 && b == 0.0));
        assert_eq!(p.value(0.37), 0.0);
        let r = check_condition_s(&p, &c).unwrap();
        assert!(!r.condition_s_holds);
    }

    #[test]
    fn continuity_and_jumps_hold_for_presets() {
        for name in ["ex1", "ex2"] {
            let c = ModelConfig::preset(name).unwrap();
            let p = solve_stationary(&c).unwrap();
            for k in 0..3 {
                assert!(p.value_jump(k).abs() < 1e-10);
                assert!((p.slope_jump(k) + 1.0).abs() < 1e-10);
                // both one-sided evaluations at a junction agree
                let left = (k + 2) % 3;
                let from_left = p.interval_value(left, p.lengths[left]);
                assert!((from_left - p.value(c.junctions[k])).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn translation_shifts_profile() {
        let c = ModelConfig::preset("ex1").unwrap();
        let p = solve_stationary(&c).unwrap();
        let delta = 0.237;
        let mut shifted = c.clone();
        let mut pairs: Vec<(f64, f64)> = c
            .junctions
            .iter()
            .zip(&c.jump_strengths)
            .map(|(a, s)| ((a + delta).rem_euclid(1.0), *s))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        shifted.junctions = pairs.iter().map(|p| p.0).collect();
        shifted.jump_strengths = pairs.iter().map(|p| p.1).collect();
        let q = solve_stationary(&shifted).unwrap();
        for i in 0..500 {
            let x = i as f64 / 500.0 + 1e-4;
            assert!((q.value(x + delta) - p.value(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn alpha_zero_is_routed() {
        let c = single_delta(0.0, 1.0);
        assert!(matches!(solve_stationary(&c), Err(Error::Unsupported(_))));
        let p = solve_stationary_alpha0(&c).unwrap();
        for i in 0..100 {
            let x = i as f64 / 100.0;
            let expected = x * x / 2.0 - x / 2.0 + 1.0 / 12.0;
            assert!((p.value(x) - expected).abs() < 1e-14);
        }
        assert!((p.slope_jump(0) + 1.0).abs() < 1e-14);
        assert!(p.integral().abs() < 1e-15);
        assert!(matches!(
            check_condition_s(&p, &c),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn alpha_zero_requires_balance() {
        let c = single_delta(0.0, 2.0);
        assert!(matches!(
            solve_stationary_alpha0(&c),
            Err(Error::NoSolution(_))
        ));
        let mut z = single_delta(0.0, 0.0);
        z.jump_strengths = vec![0.0];
        let p = solve_stationary_alpha0(&z).unwrap();
        assert_eq!(p.value(0.3), 0.0);
    }

    #[test]
    fn alpha_zero_multi_junction_conditions() {
        let mut c = ModelConfig::preset("ex1").unwrap();
        c.alpha = 0.0;
        c.jump_strengths = vec![1.0, 0.5, 2.0];
        c.forcing_offset = 3.5;
        let p = solve_stationary_alpha0(&c).unwrap();
        for k in 0..3 {
            assert!(p.value_jump(k).abs() < 1e-12);
            assert!((p.slope_jump(k) + c.jump_strengths[k]).abs() < 1e-12);
        }
        assert!(p.integral().abs() < 1e-13);
    }

    #[test]
    fn condition_s_examples() {
        let ex1 = ModelConfig::preset("ex1").unwrap();
        let p = solve_stationary(&ex1).unwrap();
        let r = check_condition_s(&p, &ex1).unwrap();
        assert!(r.threshold_localized, "{r:?}");
        assert_eq!(r.rupture_interval_index, Some(0));
        assert!(r.dips_below_threshold);
        // s(0.1) = 0.04451... exceeds eta_a = 0.03 at the left junction.
        assert!((r.max_per_interval[0].1 - 0.044_514_5).abs() < 1e-6);
        assert!(!r.eta_a_clearance);
        assert!(!r.condition_s_holds);
        let mut raised = ex1.clone();
        raised.eta_a = 0.05;
        let r = check_condition_s(&p, &raised).unwrap();
        assert!(r.condition_s_holds, "{r:?}");

        let ex2 = ModelConfig::preset("ex2").unwrap();
        let p = solve_stationary(&ex2).unwrap();
        let r = check_condition_s(&p, &ex2).unwrap();
        assert!(!r.condition_s_holds, "{r:?}");
    }

    #[test]
    fn interval_minimum_is_not_below_dense_samples() {
        for name in ["ex1", "ex2"] {
            let c = ModelConfig::preset(name).unwrap();
            let p = solve_stationary(&c).unwrap();
            for k in 0..3 {
                let (lo, hi) = p.interval_extrema(k);
                let l = p.lengths[k];
                let samples = (0..=10_000).map(|i| p.interval_value(k, l * i as f64 / 10_000.0));
                let (slo, shi) = samples.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                    (a.min(v), b.max(v))
                });
                assert!(lo <= slo + 1e-15 && slo - lo < 1e-9);
                assert!(hi >= shi - 1e-15 && hi - shi < 1e-9);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_config(fracs: Vec<f64>, cs: Vec<f64>, alpha: f64, sigma: f64) -> ModelConfig {
            let mut junctions: Vec<f64> = fracs;
            junctions.sort_by(f64::total_cmp);
            junctions.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            let k = junctions.len();
            let mut c = ModelConfig::preset("ex1").unwrap();
            c.junctions = junctions;
            c.jump_strengths = cs[..k].to_vec();
            c.forcing_offset = c.jump_strengths.iter().sum::<f64>();
            c.alpha = alpha;
            c.sigma2 = sigma;
            c
        }

        proptest! {
            #[test]
            fn residual_and_zero_mean(
                fracs in proptest::collection::vec(0.0f64..1.0, 1..6),
                cs in proptest::collection::vec(0.0f64..3.0, 6),
                alpha in 0.05f64..80.0,
                sigma in 0.2f64..3.0,
            ) {
                let c = random_config(fracs, cs, alpha, sigma);
                let p = solve_stationary(&c).unwrap();
                let a_eff = c.forcing_offset;
                for i in 0..1000 {
                    let x = (i as f64 + 0.5) / 1000.0;
                    if c.junctions.iter().any(|a| (a - x).abs() < 1e-9) { continue; }
                    let r = sigma * p.second_derivative(x) - alpha * p.value(x) - a_eff;
                    prop_assert!(r.abs() <= 1e-9 * (1.0 + a_eff.abs()), "residual {r}");
                }
                for k in 0..c.interval_count() {
                    prop_assert!(p.value_jump(k).abs() <= 1e-10 * (1.0 + p.value(c.junctions[k]).abs()));
                    prop_assert!((p.slope_jump(k) + c.jump_strengths[k] / sigma).abs() <= 1e-10);
                }
                prop_assert!(p.integral().abs() <= 1e-8);
            }

            #[test]
            fn linear_in_forcing(
                fracs in proptest::collection::vec(0.0f64..1.0, 1..5),
                cs in proptest::collection::vec(0.0f64..3.0, 5),
                alpha in 0.1f64..20.0,
                gamma in 0.1f64..10.0,
            ) {
                let c = random_config(fracs, cs, alpha, 1.0);
                let mut scaled = c.clone();
                scaled.jump_strengths.iter_mut().for_each(|v| *v *= gamma);
                scaled.forcing_offset *= gamma;
                let p = solve_stationary(&c).unwrap();
                let q = solve_stationary(&scaled).unwrap();
                let shift = c.forcing_offset / alpha;
                for i in 0..200 {
                    let x = (i as f64 + 0.25) / 200.0;
                    let lhs = q.value(x) + gamma * shift;
                    let rhs = gamma * (p.value(x) + shift);
                    prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
                }
            }

            #[test]
            fn repeated_solves_agree(
                fracs in proptest::collection::vec(0.0f64..1.0, 1..6),
                cs in proptest::collection::vec(0.0f64..3.0, 6),
                alpha in 0.05f64..80.0,
            ) {
                let c = random_config(fracs, cs, alpha, 1.0);
                let p = solve_stationary(&c).unwrap();
                let q = solve_stationary(&c.clone()).unwrap();
                for (a, b) in p.coeffs.iter().zip(&q.coeffs) {
                    prop_assert!((a.0 - b.0).abs() <= 1e-10 && (a.1 - b.1).abs() <= 1e-10);
                }
            }
        }
    }
}
