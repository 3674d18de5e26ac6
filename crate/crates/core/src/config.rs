//! Model parameters, scenario files and the basic admissibility checks.
//!
//! A scenario is a flat JSON object. Junction `k` (0-based) sits at
//! `junctions[k]`; interval `k` is the half-open arc `[a_k, a_{k+1})`, with
//! the last interval wrapping around to `a_0 + omega`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Single equation for the layer thickness `eta`.
    Decoupled,
    /// Full `(h, zeta)` system with `eta = zeta - h`.
    Coupled,
}

/// Which reduction turns the coupled system into a single `eta` equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ReductionCase {
    /// `sigma2 = sigma1 / tau`: forcing enters as `f / tau`.
    #[default]
    #[serde(rename = "case_i")]
    CaseI,
    /// Instantaneous relaxation of `h`: forcing enters as `(sigma2 / sigma1) f`.
    #[serde(rename = "case_ii")]
    CaseII,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub grid_points: usize,
    pub dt: f64,
    /// Relative (to `eta_a`) tolerance for locating crossings and building
    /// the rupture set.
    pub event_tol: f64,
    pub fp_tol: f64,
    pub max_ruptures: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            grid_points: 1024,
            dt: 1e-4,
            event_tol: 1e-6,
            fp_tol: 1e-6,
            max_ruptures: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub omega: f64,
    pub junctions: Vec<f64>,
    pub jump_strengths: Vec<f64>,
    pub forcing_offset: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub tau: f64,
    pub alpha: f64,
    pub eta_c: f64,
    pub eta_a: f64,
    pub d: f64,
    pub mode: Mode,
    #[serde(default)]
    pub reduction_case: ReductionCase,
    #[serde(default)]
    pub numerics: Numerics,
}

/// Coefficients of the single `eta` equation
/// `eta_t = sigma eta_xx - alpha eta + sum c_k delta(x - a_k) - offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoupledParams {
    pub sigma: f64,
    pub alpha: f64,
    pub jump_strengths: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub condition_c_holds: bool,
    pub integral_f: f64,
    pub mass_conserving: bool,
    pub messages: Vec<String>,
}

pub const PRESETS: [&str; 3] = ["ex1", "ex2", "ex3"];

impl ModelConfig {
    /// Built-in scenarios: `ex1` (periodic orbit), `ex2` (multi-interval
    /// rupture), `ex3` (coupled, no periodicity).
    pub fn preset(name: &str) -> Result<Self> {
        let eta_a = 0.03;
        let base = ModelConfig {
            omega: 1.0,
            junctions: vec![0.1, 0.6, 0.9],
            jump_strengths: vec![1.0; 3],
            forcing_offset: 3.0,
            sigma1: 1.0,
            sigma2: 1.0,
            tau: 1.0,
            alpha: 1.0,
            eta_c: eta_a * 1e-12,
            eta_a,
            d: 0.1,
            mode: Mode::Decoupled,
            reduction_case: ReductionCase::CaseI,
            numerics: Numerics::default(),
        };
        match name {
            "ex1" => Ok(base),
            "ex2" => Ok(ModelConfig {
                alpha: 60.0,
                eta_c: eta_a * 1e-1,
                ..base
            }),
            "ex3" => Ok(ModelConfig {
                sigma1: 0.5,
                sigma2: 1.0,
                mode: Mode::Coupled,
                ..base
            }),
            other => Err(Error::Domain(format!(
                "unknown preset {other:?}, expected one of {PRESETS:?}"
            ))),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_json_value(value)
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        let config: ModelConfig =
            serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }

    /// Enforces the type invariants. Condition (C) is not part of this; see
    /// [`validate`].
    pub fn check(&self) -> Result<()> {
        let finite = [
            ("omega", self.omega),
            ("forcing_offset", self.forcing_offset),
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
            ("tau", self.tau),
            ("alpha", self.alpha),
            ("eta_c", self.eta_c),
            ("eta_a", self.eta_a),
            ("d", self.d),
            ("numerics.dt", self.numerics.dt),
            ("numerics.event_tol", self.numerics.event_tol),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in [
            ("omega", self.omega),
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
            ("tau", self.tau),
            ("d", self.d),
            ("eta_c", self.eta_c),
            ("numerics.dt", self.numerics.dt),
            ("numerics.event_tol", self.numerics.event_tol),
        ] {
            if v <= 0.0 {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if self.alpha < 0.0 {
            return Err(Error::Domain(format!(
                "alpha must be non-negative, got {}",
                self.alpha
            )));
        }
        if self.eta_a <= self.eta_c {
            return Err(Error::Domain(format!(
                "eta_a ({}) must exceed eta_c ({})",
                self.eta_a, self.eta_c
            )));
        }
        if self.numerics.fp_tol.is_nan() || self.numerics.fp_tol <= 0.0 {
            return Err(Error::Domain("numerics.fp_tol must be positive".into()));
        }
        if self.junctions.is_empty() {
            return Err(Error::Domain("at least one junction is required".into()));
        }
        if self.junctions.len() != self.jump_strengths.len() {
            return Err(Error::Domain(format!(
                "{} junctions but {} jump strengths",
                self.junctions.len(),
                self.jump_strengths.len()
            )));
        }
        if let Some(c) = self.jump_strengths.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("jump strength {c} is not finite")));
        }
        for &a in &self.junctions {
            if !(a >= 0.0 && a < self.omega) {
                return Err(Error::Domain(format!(
                    "junction {a} lies outside [0, {})",
                    self.omega
                )));
            }
        }
        if self.junctions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(
                "junctions must be strictly increasing".into(),
            ));
        }
        if self.numerics.grid_points < 4 {
            return Err(Error::GridSize(self.numerics.grid_points));
        }
        Ok(())
    }

    pub fn interval_count(&self) -> usize {
        self.junctions.len()
    }

    /// Endpoints `(a_k, a_{k+1})` of interval `k`, unwrapped so that the
    /// right end exceeds the left (the last interval ends at `a_0 + omega`).
    pub fn interval_bounds(&self, k: usize) -> (f64, f64) {
        let n = self.junctions.len();
        let left = self.junctions[k];
        let right = if k + 1 == n {
            self.junctions[0] + self.omega
        } else {
            self.junctions[k + 1]
        };
        (left, right)
    }

    pub fn interval_length(&self, k: usize) -> f64 {
        let (l, r) = self.interval_bounds(k);
        r - l
    }

    /// Index of the half-open interval `[a_k, a_{k+1})` containing `x`.
    pub fn interval_of(&self, x: f64) -> usize {
        let x = x.rem_euclid(self.omega);
        // number of junctions <= x
        let count = self.junctions.partition_point(|&a| a <= x);
        if count == 0 {
            self.junctions.len() - 1
        } else {
            count - 1
        }
    }

    /// Offset of `x` from the left end of its interval, in `[0, length)`.
    pub fn local_coordinate(&self, x: f64) -> (usize, f64) {
        let x = x.rem_euclid(self.omega);
        let k = self.interval_of(x);
        let u = (x - self.junctions[k]).rem_euclid(self.omega);
        (k, u)
    }

    /// Whether `x` lies in the open interval `(a_k, a_{k+1})`.
    pub fn in_open_interval(&self, x: f64, k: usize) -> bool {
        let (left, right) = self.interval_bounds(k);
        let len = right - left;
        let u = (x - left).rem_euclid(self.omega);
        u > 0.0 && u < len
    }

    pub fn decoupled_params(&self) -> DecoupledParams {
        let scale = match self.reduction_case {
            ReductionCase::CaseI => 1.0 / self.tau,
            ReductionCase::CaseII => self.sigma2 / self.sigma1,
        };
        DecoupledParams {
            sigma: self.sigma2,
            alpha: self.alpha,
            jump_strengths: self.jump_strengths.iter().map(|c| c * scale).collect(),
            offset: self.forcing_offset * scale,
        }
    }
}

impl DecoupledParams {
    pub fn total_jump(&self) -> f64 {
        self.jump_strengths.iter().sum()
    }
}

pub fn load_scenario(path: &Path) -> Result<ModelConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ModelConfig::from_json_str(&text)
}

pub fn validate(config: &ModelConfig) -> ValidationReport {
    let sum_c: f64 = config.jump_strengths.iter().sum();
    let threshold = sum_c / config.omega;
    let integral_f = sum_c - config.forcing_offset * config.omega;
    let nonnegative = config.jump_strengths.iter().all(|&c| c >= 0.0);
    let offset_ok = config.forcing_offset >= threshold;
    let scale = config.forcing_offset.abs().max(threshold.abs());
    let mass_conserving = (config.forcing_offset - threshold).abs() <= 1e-12 * scale;

    let mut messages = Vec::new();
    if !nonnegative {
        messages.push("condition (C) fails: some jump strength is negative".to_string());
    }
    if !offset_ok {
        messages.push(format!(
            "condition (C) fails: forcing offset {} is below sum(c)/omega = {threshold}",
            config.forcing_offset
        ));
    }
    if mass_conserving {
        messages.push("forcing offset conserves the mass of h".to_string());
    } else {
        messages.push(format!("integral of f is {integral_f}"));
    }
    if config.alpha == 0.0 {
        messages.push("alpha = 0: rupture times need not be finite".to_string());
    }

    ValidationReport {
        condition_c_holds: nonnegative && offset_ok,
        integral_f,
        mass_conserving,
        messages,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn json_of(config: &ModelConfig) -> serde_json::Value {
        serde_json::to_value(config).unwrap()
    }

    #[test]
    fn ex1_preset_values() {
        let c = ModelConfig::preset("ex1").unwrap();
        assert_eq!(c.omega, 1.0);
        assert_eq!(c.junctions, vec![0.1, 0.6, 0.9]);
        assert_eq!(c.jump_strengths, vec![1.0; 3]);
        assert_eq!(c.forcing_offset, 3.0);
        assert_eq!(c.eta_a, 0.03);
        assert_eq!(c.eta_c, 0.03e-12);
        assert_eq!(c.d, 0.1);
        assert_eq!(c.mode, Mode::Decoupled);
        c.check().unwrap();
    }

    #[test]
    fn zero_forcing_is_valid() {
        let mut v = json_of(&ModelConfig::preset("ex1").unwrap());
        v["junctions"] = serde_json::json!([0.5]);
        v["jump_strengths"] = serde_json::json!([0.0]);
        v["forcing_offset"] = serde_json::json!(0.0);
        let c = ModelConfig::from_json_value(v).unwrap();
        let report = validate(&c);
        assert!(report.condition_c_holds);
        assert_eq!(report.integral_f, 0.0);
        assert!(report.mass_conserving);
    }

    #[test]
    fn eta_a_not_above_eta_c_is_domain_error() {
        let mut v = json_of(&ModelConfig::preset("ex1").unwrap());
        v["eta_a"] = serde_json::json!(0.01);
        v["eta_c"] = serde_json::json!(0.01);
        assert!(matches!(
            ModelConfig::from_json_value(v),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn unsorted_junctions_rejected() {
        let mut v = json_of(&ModelConfig::preset("ex1").unwrap());
        v["junctions"] = serde_json::json!([0.6, 0.1, 0.9]);
        assert!(matches!(
            ModelConfig::from_json_value(v),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn parse_and_schema_errors_are_distinct() {
        assert!(matches!(
            ModelConfig::from_json_str("{ not json"),
            Err(Error::Parse(_))
        ));
        let mut v = json_of(&ModelConfig::preset("ex1").unwrap());
        v.as_object_mut().unwrap().remove("alpha");
        assert!(matches!(
            ModelConfig::from_json_value(v.clone()),
            Err(Error::Schema(_))
        ));
        v["alpha"] = serde_json::json!("one");
        assert!(matches!(
            ModelConfig::from_json_value(v.clone()),
            Err(Error::Schema(_))
        ));
        v["alpha"] = serde_json::json!(1.0);
        v["extra"] = serde_json::json!(1.0);
        assert!(matches!(
            ModelConfig::from_json_value(v),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn numerics_defaults_fill_missing_fields() {
        let mut v = json_of(&ModelConfig::preset("ex1").unwrap());
        v["numerics"] = serde_json::json!({ "dt": 0.001 });
        let c = ModelConfig::from_json_value(v).unwrap();
        assert_eq!(c.numerics.dt, 0.001);
        assert_eq!(c.numerics.grid_points, 1024);
        assert_eq!(c.numerics.event_tol, 1e-6);

        let mut v = json_of(&c);
        v.as_object_mut().unwrap().remove("numerics");
        v.as_object_mut().unwrap().remove("reduction_case");
        let c = ModelConfig::from_json_value(v).unwrap();
        assert_eq!(c.numerics, Numerics::default());
        assert_eq!(c.reduction_case, ReductionCase::CaseI);
    }

    #[test]
    fn validate_examples() {
        let ex1 = ModelConfig::preset("ex1").unwrap();
        let r = validate(&ex1);
        assert!(r.condition_c_holds);
        assert_eq!(r.integral_f, 0.0);
        assert!(r.mass_conserving);

        let mut c = ex1.clone();
        c.junctions = vec![0.2, 0.7];
        c.jump_strengths = vec![-1.0, 2.0];
        c.forcing_offset = 1.0;
        assert!(!validate(&c).condition_c_holds);

        let mut c = ex1.clone();
        c.junctions = vec![0.0];
        c.jump_strengths = vec![1.0];
        c.forcing_offset = 2.0;
        let r = validate(&c);
        assert!(r.condition_c_holds);
        assert_eq!(r.integral_f, -1.0);
        assert!(!r.mass_conserving);
        assert_eq!(r, validate(&c));
    }

    #[test]
    fn interval_lookup_is_half_open_and_wraps() {
        let c = ModelConfig::preset("ex1").unwrap();
        assert_eq!(c.interval_of(0.1), 0);
        assert_eq!(c.interval_of(0.599), 0);
        assert_eq!(c.interval_of(0.6), 1);
        assert_eq!(c.interval_of(0.95), 2);
        assert_eq!(c.interval_of(0.05), 2);
        assert_eq!(c.interval_bounds(2), (0.9, 1.1));
        let (k, u) = c.local_coordinate(0.05);
        assert_eq!(k, 2);
        assert!((u - 0.15).abs() < 1e-15);
        assert!(c.in_open_interval(0.35, 0));
        assert!(!c.in_open_interval(0.1, 0));
        assert!(!c.in_open_interval(0.6, 0));
        assert!(c.in_open_interval(0.05, 2));
    }

    #[test]
    fn reduction_cases_scale_forcing() {
        let mut c = ModelConfig::preset("ex1").unwrap();
        c.tau = 2.0;
        c.sigma1 = 4.0;
        c.sigma2 = 0.5;
        let p = c.decoupled_params();
        assert_eq!(p.sigma, 0.5);
        assert_eq!(p.jump_strengths, vec![0.5; 3]);
        assert_eq!(p.offset, 1.5);
        c.reduction_case = ReductionCase::CaseII;
        let p = c.decoupled_params();
        assert_eq!(p.jump_strengths, vec![0.125; 3]);
        assert_eq!(p.offset, 0.375);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn round_trip_is_bit_exact(
                omega in 0.1f64..10.0,
                fracs in proptest::collection::vec(0.0f64..1.0, 1..6),
                cs in proptest::collection::vec(-5.0f64..5.0, 6),
                alpha in 0.0f64..100.0,
                eta_c in 1e-15f64..1e-2,
                extra in 1e-6f64..1.0,
                dt in 1e-7f64..1e-2,
            ) {
                let mut junctions: Vec<f64> = fracs.iter().map(|f| f * omega).collect();
                junctions.sort_by(f64::total_cmp);
                junctions.dedup();
                let k = junctions.len();
                let config = ModelConfig {
                    omega,
                    junctions,
                    jump_strengths: cs[..k].to_vec(),
                    forcing_offset: cs.iter().sum::<f64>() / 3.7,
                    sigma1: 0.3 + alpha / 7.0,
                    sigma2: 1.0 / 3.0,
                    tau: std::f64::consts::PI,
                    alpha,
                    eta_c,
                    eta_a: eta_c + extra,
                    d: 0.1,
                    mode: Mode::Coupled,
                    reduction_case: ReductionCase::CaseII,
                    numerics: Numerics { dt, ..Numerics::default() },
                };
                prop_assume!(config.check().is_ok());
                let back = ModelConfig::from_json_str(&config.to_json_string()).unwrap();
                prop_assert_eq!(back, config);
            }

            #[test]
            fn mass_conserving_offset_zeroes_integral(
                cs in proptest::collection::vec(0.0f64..10.0, 1..8),
                omega in 0.5f64..4.0,
            ) {
                let k = cs.len();
                let mut config = ModelConfig::preset("ex1").unwrap();
                config.omega = omega;
                config.junctions = (0..k).map(|i| i as f64 * omega / k as f64).collect();
                config.forcing_offset = cs.iter().sum::<f64>() / omega;
                config.jump_strengths = cs;
                let r = validate(&config);
                let sum: f64 = config.jump_strengths.iter().sum();
                prop_assert!(r.integral_f.abs() <= 2.0 * f64::EPSILON * sum.max(1.0));
                prop_assert!(r.mass_conserving);
            }
        }
    }
}
