//! C ABI over the `hscai` solvers.
//!
//! Problems and results are opaque heap handles created and released by this
//! library. Every fallible call returns an [`HscaiStatus`]; on failure a
//! message is available from [`hscai_last_error`] on the same thread until
//! the next failing call. Agents are numbered from 1 at this boundary, as in
//! problem files.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hscai::model::{generate_random, GeneratorParams};
use hscai::{AgentId, Algorithm, Error, Problem, RunResult, SolverConfig, ThresholdSpec};

/// Opaque problem instance.
pub struct HscaiProblem(Problem);

/// Opaque solver outcome.
pub struct HscaiResult {
    run: RunResult,
    values: Vec<usize>,
    trace: Option<CString>,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HscaiStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidProblem = 3,
    BadConfig = 4,
    TooLarge = 5,
    Livelock = 6,
    SolverError = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HscaiAlgorithm {
    HsCai = 0,
    HsAi = 1,
    HsCaiNoEval = 2,
    Dpop = 3,
    Brute = 4,
}

impl From<HscaiAlgorithm> for Algorithm {
    fn from(a: HscaiAlgorithm) -> Self {
        match a {
            HscaiAlgorithm::HsCai => Algorithm::HsCai,
            HscaiAlgorithm::HsAi => Algorithm::HsAi,
            HscaiAlgorithm::HsCaiNoEval => Algorithm::HsCaiNoEval,
            HscaiAlgorithm::Dpop => Algorithm::Dpop,
            HscaiAlgorithm::Brute => Algorithm::Brute,
        }
    }
}

/// Solver settings. A finite `t` wins over `rho`; NaN in both picks the
/// default ρ for `k`. `root` 0 picks the highest-degree agent.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct HscaiOptions {
    pub algorithm: HscaiAlgorithm,
    pub k: u32,
    pub rho: f64,
    pub t: f64,
    pub root: u32,
    pub trace: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> HscaiStatus {
    match err {
        Error::InvalidProblem(_) | Error::NotConnected | Error::DensityTooLow { .. } | Error::Json(_) => {
            HscaiStatus::InvalidProblem
        }
        Error::BadConfig(_) => HscaiStatus::BadConfig,
        Error::InstanceTooLarge { .. } => HscaiStatus::TooLarge,
        Error::Livelock { .. } => HscaiStatus::Livelock,
        _ => HscaiStatus::SolverError,
    }
}

/// Runs `f`, recording any error or panic for [`hscai_last_error`].
fn guard(f: impl FnOnce() -> Result<(), HscaiStatus>) -> HscaiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HscaiStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".into());
            HscaiStatus::Panic
        }
    }
}

fn fail(err: Error) -> HscaiStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn null(what: &str) -> HscaiStatus {
    set_error(format!("{what} is NULL"));
    HscaiStatus::NullArgument
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hscai_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hscai_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// HS-CAI with k = 6 and the default threshold.
#[no_mangle]
pub extern "C" fn hscai_default_options() -> HscaiOptions {
    HscaiOptions { algorithm: HscaiAlgorithm::HsCai, k: 6, rho: f64::NAN, t: f64::NAN, root: 0, trace: false }
}

/// Parses a problem from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hscai_problem_from_json(json: *const c_char, out: *mut *mut HscaiProblem) -> HscaiStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|_| {
            set_error("json is not valid UTF-8".into());
            HscaiStatus::InvalidUtf8
        })?;
        let problem = Problem::from_json(text).map_err(fail)?;
        *out = Box::into_raw(Box::new(HscaiProblem(problem)));
        Ok(())
    })
}

/// Generates a random connected problem.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hscai_problem_generate(
    agents: usize,
    density: f64,
    domain_size: usize,
    max_cost: u64,
    seed: u64,
    out: *mut *mut HscaiProblem,
) -> HscaiStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let problem =
            generate_random(GeneratorParams { agents, density, domain_size, max_cost, seed }).map_err(fail)?;
        *out = Box::into_raw(Box::new(HscaiProblem(problem)));
        Ok(())
    })
}

/// Number of agents, 0 for NULL.
///
/// # Safety
/// `problem` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hscai_problem_agent_count(problem: *const HscaiProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.0.agent_count())
}

/// # Safety
/// `problem` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hscai_problem_free(problem: *mut HscaiProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Solves `problem`; `options` may be NULL for the defaults.
///
/// # Safety
/// `problem` must be a live handle, `options` NULL or valid, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hscai_solve(
    problem: *const HscaiProblem,
    options: *const HscaiOptions,
    out: *mut *mut HscaiResult,
) -> HscaiStatus {
    guard(|| {
        let problem = &problem.as_ref().ok_or_else(|| null("problem"))?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = options.as_ref().copied().unwrap_or_else(|| hscai_default_options());
        let mut config = SolverConfig::new(opts.algorithm.into(), opts.k as usize);
        config.threshold = if opts.t.is_finite() {
            ThresholdSpec::T(opts.t)
        } else if opts.rho.is_finite() {
            ThresholdSpec::Rho(opts.rho)
        } else {
            ThresholdSpec::Default
        };
        if opts.root > 0 {
            config.root = Some(AgentId(opts.root as usize - 1));
        }
        config.trace = opts.trace;
        let run = hscai::solve(problem, &config).map_err(fail)?;
        let values = run.assignment.to_values(problem.agent_count()).map_err(fail)?;
        let trace = run.trace.as_ref().map(|t| CString::new(t.as_str()).expect("traces hold no NUL"));
        *out = Box::into_raw(Box::new(HscaiResult { run, values, trace }));
        Ok(())
    })
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hscai_result_cost(result: *const HscaiResult) -> u64 {
    result.as_ref().map_or(0, |r| r.run.cost)
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hscai_result_messages(result: *const HscaiResult) -> u64 {
    result.as_ref().map_or(0, |r| r.run.metrics.messages)
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hscai_result_network_load(result: *const HscaiResult) -> u64 {
    result.as_ref().map_or(0, |r| r.run.metrics.network_load)
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hscai_result_nclo(result: *const HscaiResult) -> u64 {
    result.as_ref().map_or(0, |r| r.run.metrics.nclo)
}

/// Copies the value of agent i into `values[i - 1]`. `len` must be at
/// least the agent count; `written` (optional) receives the agent count.
///
/// # Safety
/// `result` must be a live handle and `values` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn hscai_result_assignment(
    result: *const HscaiResult,
    values: *mut usize,
    len: usize,
    written: *mut usize,
) -> HscaiStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if !written.is_null() {
            *written = r.values.len();
        }
        if len < r.values.len() {
            set_error(format!("buffer holds {len} values, {} needed", r.values.len()));
            return Err(HscaiStatus::BufferTooSmall);
        }
        if values.is_null() {
            return Err(null("values"));
        }
        ptr::copy_nonoverlapping(r.values.as_ptr(), values, r.values.len());
        Ok(())
    })
}

/// TSV message trace owned by `result`, or NULL when tracing was off.
///
/// # Safety
/// `result` must be a live handle; the string dies with it.
#[no_mangle]
pub unsafe extern "C" fn hscai_result_trace(result: *const HscaiResult) -> *const c_char {
    result.as_ref().and_then(|r| r.trace.as_ref()).map_or(ptr::null(), |t| t.as_ptr())
}

/// # Safety
/// `result` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hscai_result_free(result: *mut HscaiResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
