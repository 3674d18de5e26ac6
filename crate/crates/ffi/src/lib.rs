//! C interface to `rupture_core`.
//!
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `*_free`. Every fallible call returns an
//! [`RptStatus`]; the message for the most recent failure on the calling
//! thread is available from [`rpt_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use rupture_core::cli::{apply_overrides, initial_state};
use rupture_core::{
    check_condition_s, find_periodic, rupture_time_bounds, run_with_rupture, solve_stationary, ConvergenceReport,
    Error, ErrorKind, Field, Grid, ModelConfig, Operators, RuptureRun, StationaryProfile, Stop,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RptStatus {
    Ok = 0,
    ModelViolation = 1,
    Config = 2,
    Numerical = 3,
    NullPointer = 4,
    InvalidArgument = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

enum Failure {
    Core(Error),
    Null(&'static str),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> RptStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => RptStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            match e.kind() {
                ErrorKind::ModelViolation => RptStatus::ModelViolation,
                ErrorKind::Config => RptStatus::Config,
                ErrorKind::Numerical => RptStatus::Numerical,
            }
        }
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("{name} is null"));
            RptStatus::NullPointer
        }
        Ok(Err(Failure::Invalid(message))) => {
            set_last_error(message);
            RptStatus::InvalidArgument
        }
        Err(_) => {
            set_last_error("panic inside rupture_core".into());
            RptStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn text<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Invalid(format!("{name} is not valid UTF-8")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = value;
    Ok(())
}

unsafe fn copy_out(values: &[f64], buf: *mut f64, cap: usize, len: *mut usize) -> Result<(), Failure> {
    write(len, values.len())?;
    if cap < values.len() {
        return Err(Failure::Invalid(format!(
            "buffer holds {cap} values, {} needed",
            values.len()
        )));
    }
    if buf.is_null() {
        return Err(Failure::Null("buf"));
    }
    slice::from_raw_parts_mut(buf, values.len()).copy_from_slice(values);
    Ok(())
}

/// `eta0` of length `len`, or the constant `eta_a` when `eta0` is null.
unsafe fn initial_profile(config: &ModelConfig, eta0: *const f64, len: usize) -> Result<Field, Failure> {
    let grid = Grid::new(config.omega, config.numerics.grid_points)?;
    if eta0.is_null() {
        return Ok(Field::constant(grid, config.eta_a));
    }
    if len != grid.n {
        return Err(Failure::Invalid(format!(
            "initial profile has {len} values, grid has {}",
            grid.n
        )));
    }
    Ok(Field::new(grid, slice::from_raw_parts(eta0, len).to_vec(), 0.0))
}

pub struct RptConfig(ModelConfig);
pub struct RptStationary(StationaryProfile);
pub struct RptRun(RuptureRun);
pub struct RptPeriodic(ConvergenceReport);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RptConditionS {
    pub holds: bool,
    pub threshold_localized: bool,
    pub eta_a_clearance: bool,
    /// Distinguished interval, or -1.
    pub interval: i64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RptBounds {
    pub t_lower: f64,
    pub t_upper: f64,
    pub lower_applicable: bool,
    pub upper_applicable: bool,
}

/// Library version; static storage, do not free.
#[no_mangle]
pub extern "C" fn rpt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Free with
/// [`rpt_string_free`].
#[no_mangle]
pub extern "C" fn rpt_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        Some(m) => m.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rpt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `name` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rpt_config_preset(name: *const c_char, out: *mut *mut RptConfig) -> RptStatus {
    guard(|| {
        let config = ModelConfig::preset(text(name, "name")?)?;
        store(out, RptConfig(config))
    })
}

/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rpt_config_from_json(json: *const c_char, out: *mut *mut RptConfig) -> RptStatus {
    guard(|| {
        let config = ModelConfig::from_json_str(text(json, "json")?)?;
        store(out, RptConfig(config))
    })
}

/// Pretty JSON for the config. Free with [`rpt_string_free`].
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rpt_config_to_json(config: *const RptConfig, out: *mut *mut c_char) -> RptStatus {
    guard(|| {
        let config = borrow(config, "config")?;
        let json = CString::new(config.0.to_json_string()).expect("JSON has no nul bytes");
        write(out, json.into_raw())
    })
}

/// Sets one field by `key` (dots for nested fields) from a JSON `value`.
/// The config is left unchanged on failure.
///
/// # Safety
/// `config` must be a live handle; `key` and `value` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn rpt_config_set(config: *mut RptConfig, key: *const c_char, value: *const c_char) -> RptStatus {
    guard(|| {
        let config = config.as_mut().ok_or(Failure::Null("config"))?;
        let item = format!("{}={}", text(key, "key")?, text(value, "value")?);
        config.0 = apply_overrides(&config.0, &[item])?;
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rpt_config_free(config: *mut RptConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rpt_stationary_solve(config: *const RptConfig, out: *mut *mut RptStationary) -> RptStatus {
    guard(|| {
        let profile = solve_stationary(&borrow(config, "config")?.0)?;
        store(out, RptStationary(profile))
    })
}

/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rpt_stationary_eval(profile: *const RptStationary, x: f64, out: *mut f64) -> RptStatus {
    guard(|| write(out, borrow(profile, "profile")?.0.value(x)))
}

/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rpt_stationary_condition_s(
    profile: *const RptStationary,
    config: *const RptConfig,
    out: *mut RptConditionS,
) -> RptStatus {
    guard(|| {
        let r = check_condition_s(&borrow(profile, "profile")?.0, &borrow(config, "config")?.0)?;
        write(
            out,
            RptConditionS {
                holds: r.condition_s_holds,
                threshold_localized: r.threshold_localized,
                eta_a_clearance: r.eta_a_clearance,
                interval: r.rupture_interval_index.map_or(-1, |i| i as i64),
            },
        )
    })
}

/// # Safety
/// `profile` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rpt_stationary_free(profile: *mut RptStationary) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Rupture-time bounds for `eta0` (`len` nodes, or constant `eta_a` when
/// null).
///
/// # Safety
/// `config` must be live; `eta0` null or `len` readable values.
#[no_mangle]
pub unsafe extern "C" fn rpt_bounds(
    config: *const RptConfig,
    eta0: *const f64,
    len: usize,
    out: *mut RptBounds,
) -> RptStatus {
    guard(|| {
        let config = &borrow(config, "config")?.0;
        let field = initial_profile(config, eta0, len)?;
        let b = rupture_time_bounds(config, &field)?;
        write(
            out,
            RptBounds {
                t_lower: b.t_lower,
                t_upper: b.t_upper,
                lower_applicable: b.lower_applicable,
                upper_applicable: b.upper_applicable,
            },
        )
    })
}

/// Evolves with ruptures until `max_events` events or time `t_end`
/// (non-positive values disable a criterion; both disabled means
/// `numerics.max_ruptures`).
///
/// # Safety
/// `config` must be live; `eta0` null or `len` readable values; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rpt_simulate(
    config: *const RptConfig,
    eta0: *const f64,
    len: usize,
    max_events: i64,
    t_end: f64,
    out: *mut *mut RptRun,
) -> RptStatus {
    guard(|| {
        let config = &borrow(config, "config")?.0;
        let field = initial_profile(config, eta0, len)?;
        let ops = Operators::from_config(config)?;
        let stop = Stop {
            max_events: (max_events > 0).then_some(max_events as usize),
            t_end: (t_end > 0.0).then_some(t_end),
        };
        let run = run_with_rupture(config, &ops, &initial_state(config, field), stop)?;
        store(out, RptRun(run))
    })
}

/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rpt_run_event_count(run: *const RptRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.events.len())
}

fn event(run: &RptRun, index: usize) -> Result<&rupture_core::RuptureEvent, Failure> {
    run.0
        .events
        .get(index)
        .ok_or_else(|| Failure::Invalid(format!("event {index} out of range")))
}

/// Time of event `index` (0-based).
///
/// # Safety
/// `run` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rpt_run_event_time(run: *const RptRun, index: usize, out: *mut f64) -> RptStatus {
    guard(|| write(out, event(borrow(run, "run")?, index)?.time))
}

/// Reset interval indices of event `index`. `len` receives the count even
/// when `cap` is too small.
///
/// # Safety
/// `run` must be live; `buf` holds `cap` values; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn rpt_run_event_intervals(
    run: *const RptRun,
    index: usize,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> RptStatus {
    guard(|| {
        let intervals = &event(borrow(run, "run")?, index)?.reset_intervals;
        write(len, intervals.len())?;
        if cap < intervals.len() {
            return Err(Failure::Invalid(format!("buffer holds {cap}, {} needed", intervals.len())));
        }
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        slice::from_raw_parts_mut(buf, intervals.len()).copy_from_slice(intervals);
        Ok(())
    })
}

/// Nodal `eta` just before the reset of event `index`.
///
/// # Safety
/// `run` must be live; `buf` holds `cap` values; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn rpt_run_pre_profile(
    run: *const RptRun,
    index: usize,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> RptStatus {
    guard(|| {
        let profile = event(borrow(run, "run")?, index)?.pre_profile();
        copy_out(&profile.values, buf, cap, len)
    })
}

/// # Safety
/// `run` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rpt_run_free(run: *mut RptRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Fixed-point search starting from `eta0` (constant `eta_a` when null).
/// Non-positive `fp_tol` or zero `max_iter` fall back to the config.
///
/// # Safety
/// `config` must be live; `eta0` null or `len` readable values; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rpt_find_periodic(
    config: *const RptConfig,
    eta0: *const f64,
    len: usize,
    fp_tol: f64,
    max_iter: usize,
    out: *mut *mut RptPeriodic,
) -> RptStatus {
    guard(|| {
        let config = &borrow(config, "config")?.0;
        let field = initial_profile(config, eta0, len)?;
        let fp_tol = if fp_tol > 0.0 { fp_tol } else { config.numerics.fp_tol };
        let max_iter = if max_iter > 0 { max_iter } else { config.numerics.max_ruptures };
        let report = find_periodic(config, &initial_state(config, field), fp_tol, max_iter)?;
        store(out, RptPeriodic(report))
    })
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rpt_periodic_converged(result: *const RptPeriodic) -> bool {
    result.as_ref().is_some_and(|r| r.0.converged)
}

/// Time between the last two ruptures, or NaN for a null handle.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rpt_periodic_period(result: *const RptPeriodic) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.period)
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rpt_periodic_iterations(result: *const RptPeriodic) -> usize {
    result.as_ref().map_or(0, |r| r.0.iterates.len())
}

/// # Safety
/// `result` must be live; `buf` holds `cap` values; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn rpt_periodic_profile(
    result: *const RptPeriodic,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> RptStatus {
    guard(|| copy_out(&borrow(result, "result")?.0.fixed_profile.values, buf, cap, len))
}

/// # Safety
/// `result` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rpt_periodic_free(result: *mut RptPeriodic) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
