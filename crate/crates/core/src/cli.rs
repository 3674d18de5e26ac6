//! Batch driver behind the `rupture` binary.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{load_scenario, validate, Mode, ModelConfig};
use crate::error::{Error, ErrorKind, Result};
use crate::io::{read_profile_csv, write_field_csv, write_json, write_jsonl, write_stationary_csv, EventRecord};
use crate::periodic::{find_periodic, ConvergenceReport, PoincareMap};
use crate::rupture::{rupture_time_bounds, run_with_rupture, Stop};
use crate::solver::{Field, Grid, Operators, State};
use crate::stationary::{check_condition_s, stationary_for};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MODEL_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rupture", version, about = "Diffusion with Dirac forcing and rupture resets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve with ruptures and log every event.
    Simulate(RunArgs),
    /// Evaluate the rupture-time bounds for an initial profile.
    Bounds(RunArgs),
    /// Closed-form stationary profile and condition (S).
    Stationary(RunArgs),
    /// Iterate the rupture-to-rupture map to a fixed point.
    FindPeriodic(RunArgs),
    /// Check that a profile repeats over two further rupture periods.
    Verify(RunArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct RunArgs {
    /// Built-in scenario: ex1, ex2 or ex3.
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Override a scenario field, e.g. `alpha=2` or `numerics.dt=1e-3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub max_events: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// `const:<v>`, `const_plus_sine:<v>,<amp>,<freq>` or `csv:<path>`.
    #[arg(long)]
    pub eta0: Option<String>,
    #[arg(long)]
    pub fp_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Simulate,
    Bounds,
    Stationary,
    FindPeriodic,
    Verify,
}

/// Fully parsed request for one run.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: CommandName,
    pub args: RunArgs,
}

impl From<Command> for RunManifest {
    fn from(command: Command) -> Self {
        let (command, args) = match command {
            Command::Simulate(a) => (CommandName::Simulate, a),
            Command::Bounds(a) => (CommandName::Bounds, a),
            Command::Stationary(a) => (CommandName::Stationary, a),
            Command::FindPeriodic(a) => (CommandName::FindPeriodic, a),
            Command::Verify(a) => (CommandName::Verify, a),
        };
        RunManifest { command, args }
    }
}

impl RunManifest {
    fn config_source(&self) -> String {
        match (&self.args.preset, &self.args.config) {
            (Some(p), _) => p.clone(),
            (None, Some(path)) => path.display().to_string(),
            (None, None) => "ex1".to_string(),
        }
    }
}

/// Applies `key=value` overrides onto the JSON form of a config. Nested keys
/// use dots; values parse as JSON and fall back to plain strings.
pub fn apply_overrides(config: &ModelConfig, overrides: &[String]) -> Result<ModelConfig> {
    let mut value = serde_json::to_value(config).expect("config serializes");
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::Schema(format!("override {item:?} is not key=value")))?;
        let parsed: Value =
            serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut slot = &mut value;
        for part in key.split('.') {
            slot = slot
                .as_object_mut()
                .and_then(|o| o.get_mut(part))
                .ok_or_else(|| Error::Schema(format!("unknown override key {key:?}")))?;
        }
        *slot = parsed;
    }
    ModelConfig::from_json_value(value)
}

pub fn resolve_config(args: &RunArgs) -> Result<ModelConfig> {
    let base = match (&args.preset, &args.config) {
        (Some(name), _) => ModelConfig::preset(name)?,
        (None, Some(path)) => load_scenario(path)?,
        (None, None) => ModelConfig::preset("ex1")?,
    };
    apply_overrides(&base, &args.overrides)
}

/// Parses the initial-profile mini-language on the given grid.
pub fn parse_eta0(spec: &str, grid: Grid) -> Result<Field> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("eta0 spec {spec:?} lacks a ':'")))?;
    let numbers = || -> Result<Vec<f64>> {
        rest.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number {s:?} in eta0 spec")))
            })
            .collect()
    };
    match kind {
        "const" => match numbers()?.as_slice() {
            [v] => Ok(Field::constant(grid, *v)),
            _ => Err(Error::Parse("const: takes one value".into())),
        },
        "const_plus_sine" => match numbers()?.as_slice() {
            &[v, amp, freq] => Ok(Field::from_fn(grid, |x| {
                v + amp * (2.0 * PI * freq * x / grid.omega).sin()
            })),
            _ => Err(Error::Parse(
                "const_plus_sine: takes <value>,<amplitude>,<frequency>".into(),
            )),
        },
        "csv" => {
            let values = read_profile_csv(Path::new(rest))?;
            if values.len() != grid.n {
                return Err(Error::Domain(format!(
                    "profile has {} nodes, grid has {}",
                    values.len(),
                    grid.n
                )));
            }
            Ok(Field::new(grid, values, 0.0))
        }
        other => Err(Error::Parse(format!("unknown eta0 kind {other:?}"))),
    }
}

/// Coupled runs start from a flat interface `h = 0`, so `zeta = eta0`.
pub fn initial_state(config: &ModelConfig, eta0: Field) -> State {
    match config.mode {
        Mode::Decoupled => State::Decoupled(eta0),
        Mode::Coupled => State::Coupled {
            h: Field::constant(eta0.grid, 0.0),
            zeta: eta0,
        },
    }
}

fn eta0_for(args: &RunArgs, config: &ModelConfig, grid: Grid) -> Result<Field> {
    match &args.eta0 {
        Some(spec) => parse_eta0(spec, grid),
        None => Ok(Field::constant(grid, config.eta_a)),
    }
}

/// Runs one command and maps the outcome onto the exit-code taxonomy.
pub fn run(manifest: &RunManifest) -> i32 {
    match execute(manifest) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e.kind() {
                ErrorKind::ModelViolation => EXIT_MODEL_VIOLATION,
                ErrorKind::Config => EXIT_CONFIG,
                ErrorKind::Numerical => EXIT_NUMERICAL,
            }
        }
    }
}

fn execute(manifest: &RunManifest) -> Result<i32> {
    let args = &manifest.args;
    let config = resolve_config(args)?;
    let out = &args.out;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_json(
        &out.join("manifest.json"),
        &json!({
            "command": manifest.command,
            "config_source": manifest.config_source(),
            "overrides": args.overrides,
            "max_events": args.max_events,
            "t_end": args.t_end,
            "eta0": args.eta0,
            "fp_tol": args.fp_tol,
            "max_iter": args.max_iter,
            "config": config,
        }),
    )?;
    let ops = Operators::from_config(&config)?;
    match manifest.command {
        CommandName::Simulate => simulate(args, &config, &ops, out),
        CommandName::Bounds => bounds(args, &config, &ops, out),
        CommandName::Stationary => stationary(&config, &ops, out),
        CommandName::FindPeriodic => periodic(args, &config, &ops, out),
        CommandName::Verify => verify(args, &config, &ops, out),
    }
}

fn simulate(args: &RunArgs, config: &ModelConfig, ops: &Operators, out: &Path) -> Result<i32> {
    let eta0 = eta0_for(args, config, ops.grid)?;
    let stop = Stop {
        max_events: args.max_events,
        t_end: args.t_end,
    };
    let run = run_with_rupture(config, ops, &initial_state(config, eta0), stop)?;
    let mut records = Vec::with_capacity(run.events.len());
    for e in &run.events {
        let pre_csv = format!("profile_eta_pre_{:03}.csv", e.index);
        let post_csv = format!("profile_eta_post_{:03}.csv", e.index);
        write_field_csv(&out.join(&pre_csv), &e.pre_profile())?;
        write_field_csv(&out.join(&post_csv), &e.post_profile())?;
        if let State::Coupled { h, zeta } = &e.pre {
            write_field_csv(&out.join(format!("profile_h_pre_{:03}.csv", e.index)), h)?;
            write_field_csv(&out.join(format!("profile_zeta_pre_{:03}.csv", e.index)), zeta)?;
        }
        records.push(EventRecord {
            j: e.index,
            t: e.time,
            reset_intervals: e.reset_intervals.clone(),
            min_eta: e.min_eta,
            pre_csv,
            post_csv,
        });
    }
    write_jsonl(&out.join("events.jsonl"), &records)?;
    write_field_csv(&out.join("profile_eta_final.csv"), &run.final_state.eta())?;
    write_json(
        &out.join("report.json"),
        &json!({
            "events": records.len(),
            "event_times": run.events.iter().map(|e| e.time).collect::<Vec<_>>(),
            "final_time": run.final_state.time(),
            "final_csv": "profile_eta_final.csv",
        }),
    )?;
    Ok(EXIT_OK)
}

fn bounds(args: &RunArgs, config: &ModelConfig, ops: &Operators, out: &Path) -> Result<i32> {
    let eta0 = eta0_for(args, config, ops.grid)?;
    let report = rupture_time_bounds(config, &eta0)?;
    write_json(&out.join("report.json"), &report)?;
    Ok(EXIT_OK)
}

fn stationary(config: &ModelConfig, ops: &Operators, out: &Path) -> Result<i32> {
    let profile = stationary_for(config)?;
    write_stationary_csv(&out.join("stationary.csv"), &profile, &ops.grid)?;
    let s_report = if profile.is_alpha_zero() {
        None
    } else {
        Some(check_condition_s(&profile, config)?)
    };
    write_json(
        &out.join("report.json"),
        &json!({
            "validation": validate(config),
            "condition_s": s_report,
            "profile": profile,
        }),
    )?;
    Ok(EXIT_OK)
}

fn convergence_json(report: &ConvergenceReport, out: &Path) -> Result<Value> {
    let mut rows = Vec::new();
    for (record, profiles) in report.iterates.iter().zip(&report.history) {
        let start_csv = format!("profile_iter_{:03}_start.csv", record.m);
        let pre_csv = format!("profile_iter_{:03}_pre.csv", record.m);
        write_field_csv(&out.join(&start_csv), &profiles.start)?;
        write_field_csv(&out.join(&pre_csv), &profiles.at_rupture)?;
        rows.push(json!({
            "m": record.m,
            "t_r": record.t_r,
            "sup_diff": record.sup_diff,
            "in_invariant_set": record.in_invariant_set,
            "start_csv": start_csv,
            "pre_csv": pre_csv,
        }));
    }
    write_field_csv(&out.join("profile_fixed.csv"), &report.fixed_profile)?;
    Ok(json!({
        "converged": report.converged,
        "period": report.period,
        "interval": report.interval,
        "condition_s_holds": report.condition_s_holds,
        "iterates": rows,
        "fixed_profile_csv": "profile_fixed.csv",
    }))
}

fn periodic(args: &RunArgs, config: &ModelConfig, ops: &Operators, out: &Path) -> Result<i32> {
    let eta0 = eta0_for(args, config, ops.grid)?;
    let fp_tol = args.fp_tol.unwrap_or(config.numerics.fp_tol);
    let max_iter = args.max_iter.unwrap_or(config.numerics.max_ruptures);
    let report = find_periodic(config, &initial_state(config, eta0), fp_tol, max_iter)?;
    write_json(&out.join("report.json"), &convergence_json(&report, out)?)?;
    Ok(EXIT_OK)
}

fn verify(args: &RunArgs, config: &ModelConfig, ops: &Operators, out: &Path) -> Result<i32> {
    let fp_tol = args.fp_tol.unwrap_or(config.numerics.fp_tol);
    let max_iter = args.max_iter.unwrap_or(config.numerics.max_ruptures);
    let tol = 10.0 * fp_tol;
    if config.mode == Mode::Coupled {
        let eta0 = eta0_for(args, config, ops.grid)?;
        let report = find_periodic(config, &initial_state(config, eta0), fp_tol, max_iter)?;
        let mut body = convergence_json(&report, out)?;
        body["periodic"] = json!(report.converged);
        write_json(&out.join("report.json"), &body)?;
        return Ok(if report.converged { EXIT_OK } else { EXIT_MODEL_VIOLATION });
    }

    let map = PoincareMap::new(config)?;
    let (fixed, converged) = match &args.eta0 {
        Some(spec) if spec.starts_with("csv:") => (parse_eta0(spec, ops.grid)?, None),
        _ => {
            let eta0 = eta0_for(args, config, ops.grid)?;
            let report = map.iterate(&eta0, fp_tol, max_iter)?;
            (report.fixed_profile, Some(report.converged))
        }
    };
    let report = map.verify(&fixed, tol)?;
    write_json(
        &out.join("report.json"),
        &json!({
            "periodic": report.periodic,
            "search_converged": converged,
            "tolerance": tol,
            "gaps": report.gaps,
            "profile_diffs": report.profile_diffs,
        }),
    )?;
    Ok(if report.periodic { EXIT_OK } else { EXIT_MODEL_VIOLATION })
}
