//! C interface to `avar-mdp`.
//!
//! Models and solutions are opaque heap handles released with their `_free`
//! function. Every fallible call returns an [`AvarStatus`]; on failure the
//! message is available from [`avar_last_error_message`] on the same thread.
//! Panics are caught at the boundary and reported as `AVAR_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use avar_mdp::augmented::{solve_avar, Horizon, SolveOptions};
use avar_mdp::lq::riccati_recursion;
use avar_mdp::mdp::{parse_model, DecisionRule};
use avar_mdp::risk::{average_value_at_risk, value_at_risk};
use avar_mdp::{CostDistribution, Error, FiniteMdp, RiskLevel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AvarStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    MalformedModel = 3,
    InvalidModel = 4,
    InvalidArgument = 5,
    OutOfRange = 6,
    CapacityExceeded = 7,
    SolverFailure = 8,
    Io = 9,
    Panic = 10,
}

/// Validated finite model.
pub struct AvarModel {
    inner: FiniteMdp,
}

/// Solved AVaR problem: optimal value, budget and budget-dependent policy.
pub struct AvarSolution {
    inner: avar_mdp::augmented::AvarSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure {
    status: AvarStatus,
    message: String,
}

impl Failure {
    fn new(status: AvarStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

fn status_of(err: &Error) -> AvarStatus {
    match err {
        Error::MalformedModel(_) => AvarStatus::MalformedModel,
        Error::InvalidModel(_) => AvarStatus::InvalidModel,
        Error::StateOutOfRange { .. } => AvarStatus::OutOfRange,
        Error::InvalidRiskLevel(_)
        | Error::InvalidParameter(_)
        | Error::InvalidGrid(_)
        | Error::InvalidDistribution(_)
        | Error::EmptySample => AvarStatus::InvalidArgument,
        Error::GridTooLarge { .. } | Error::EnumerationCap { .. } => AvarStatus::CapacityExceeded,
        Error::Io(_) => AvarStatus::Io,
        _ => AvarStatus::SolverFailure,
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::new(status_of(&err), err.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> AvarStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => AvarStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(failure.message);
            failure.status
        }
        Err(_) => {
            set_last_error("panic inside avar-mdp".into());
            AvarStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::new(
            AvarStatus::NullPointer,
            format!("{name} is null"),
        ))
    } else {
        Ok(())
    }
}

fn level(alpha: f64) -> Result<RiskLevel, Failure> {
    Ok(RiskLevel::new(alpha)?)
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn avar_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn avar_status_description(status: AvarStatus) -> *const c_char {
    let s: &'static CStr = match status {
        AvarStatus::Ok => c"ok",
        AvarStatus::NullPointer => c"null pointer argument",
        AvarStatus::InvalidUtf8 => c"string is not valid UTF-8",
        AvarStatus::MalformedModel => c"malformed model document",
        AvarStatus::InvalidModel => c"model failed validation",
        AvarStatus::InvalidArgument => c"invalid argument",
        AvarStatus::OutOfRange => c"index out of range",
        AvarStatus::CapacityExceeded => c"size cap exceeded",
        AvarStatus::SolverFailure => c"solver failure",
        AvarStatus::Io => c"i/o error",
        AvarStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Parses and validates a JSON model document.
///
/// # Safety
/// `json` must be a nul-terminated string and `out_model` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn avar_model_from_json(
    json: *const c_char,
    out_model: *mut *mut AvarModel,
) -> AvarStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out_model, "out_model")?;
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure::new(AvarStatus::InvalidUtf8, e.to_string()))?;
        let inner = parse_model(text)?;
        *out_model = Box::into_raw(Box::new(AvarModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`avar_model_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn avar_model_free(model: *mut AvarModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out_count` writable.
#[no_mangle]
pub unsafe extern "C" fn avar_model_state_count(
    model: *const AvarModel,
    out_count: *mut usize,
) -> AvarStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out_count, "out_count")?;
        *out_count = (*model).inner.state_count();
        Ok(())
    })
}

unsafe fn solve(
    model: *const AvarModel,
    x0: usize,
    horizon: Horizon,
    alpha: f64,
    options: SolveOptions,
    out_solution: *mut *mut AvarSolution,
) -> AvarStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out_solution, "out_solution")?;
        let inner = solve_avar(&(*model).inner, x0, horizon, level(alpha)?, &options)?;
        *out_solution = Box::into_raw(Box::new(AvarSolution { inner }));
        Ok(())
    })
}

/// Minimises AVaR of the `horizon`-stage cost from `x0` on a budget grid of
/// spacing `s_step` extended by `margin` on both sides.
///
/// # Safety
/// `model` must be a live handle and `out_solution` writable.
#[no_mangle]
pub unsafe extern "C" fn avar_solve_finite(
    model: *const AvarModel,
    x0: usize,
    horizon: usize,
    alpha: f64,
    s_step: f64,
    margin: f64,
    out_solution: *mut *mut AvarSolution,
) -> AvarStatus {
    let options = SolveOptions {
        step: s_step,
        margin,
        ..SolveOptions::default()
    };
    solve(
        model,
        x0,
        Horizon::Finite(horizon),
        alpha,
        options,
        out_solution,
    )
}

/// Infinite-horizon variant. A NaN `s_max` selects the default grid top.
///
/// # Safety
/// `model` must be a live handle and `out_solution` writable.
#[no_mangle]
pub unsafe extern "C" fn avar_solve_infinite(
    model: *const AvarModel,
    x0: usize,
    alpha: f64,
    s_step: f64,
    margin: f64,
    s_max: f64,
    out_solution: *mut *mut AvarSolution,
) -> AvarStatus {
    let options = SolveOptions {
        step: s_step,
        margin,
        s_max: (!s_max.is_nan()).then_some(s_max),
        ..SolveOptions::default()
    };
    solve(model, x0, Horizon::Infinite, alpha, options, out_solution)
}

/// # Safety
/// `solution` must come from a solve call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn avar_solution_free(solution: *mut AvarSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Optimal AVaR and the initial budget attaining it.
///
/// # Safety
/// `solution` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn avar_solution_avar(
    solution: *const AvarSolution,
    out_avar: *mut f64,
    out_s_star: *mut f64,
) -> AvarStatus {
    guard(|| {
        non_null(solution, "solution")?;
        non_null(out_avar, "out_avar")?;
        non_null(out_s_star, "out_s_star")?;
        *out_avar = (*solution).inner.avar;
        *out_s_star = (*solution).inner.s_star;
        Ok(())
    })
}

/// `w(x, s)` of the table the outer minimisation used, interpolated in `s`.
///
/// # Safety
/// `solution` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn avar_solution_value(
    solution: *const AvarSolution,
    state: usize,
    s: f64,
    out_value: *mut f64,
) -> AvarStatus {
    guard(|| {
        non_null(solution, "solution")?;
        non_null(out_value, "out_value")?;
        let table = (*solution).inner.value_table();
        if state >= table.state_count() {
            return Err(Error::StateOutOfRange {
                state,
                count: table.state_count(),
            }
            .into());
        }
        *out_value = table.value_at(state, s);
        Ok(())
    })
}

/// Action at decision time `time` in `state` with remaining budget `s`.
///
/// # Safety
/// `solution` must be a live handle and `out_action` writable.
#[no_mangle]
pub unsafe extern "C" fn avar_solution_action(
    solution: *const AvarSolution,
    time: usize,
    state: usize,
    s: f64,
    out_action: *mut usize,
) -> AvarStatus {
    guard(|| {
        non_null(solution, "solution")?;
        non_null(out_action, "out_action")?;
        *out_action = (*solution)
            .inner
            .policy()
            .decide(time, state, s)
            .ok_or_else(|| {
                Failure::new(
                    AvarStatus::OutOfRange,
                    format!("no decision at time {time}, state {state}"),
                )
            })?;
        Ok(())
    })
}

/// VaR and AVaR of a finite distribution. A null `probabilities` gives every
/// value weight `1 / len`.
///
/// # Safety
/// `values` (and `probabilities` if non-null) must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn avar_risk_measures(
    values: *const f64,
    probabilities: *const f64,
    len: usize,
    alpha: f64,
    out_var: *mut f64,
    out_avar: *mut f64,
) -> AvarStatus {
    guard(|| {
        non_null(values, "values")?;
        non_null(out_var, "out_var")?;
        non_null(out_avar, "out_avar")?;
        if len == 0 {
            return Err(Error::EmptySample.into());
        }
        let values = std::slice::from_raw_parts(values, len);
        let dist = if probabilities.is_null() {
            CostDistribution::empirical(values)?
        } else {
            let p = std::slice::from_raw_parts(probabilities, len);
            CostDistribution::new(values.iter().copied().zip(p.iter().copied()))?
        };
        let level = level(alpha)?;
        *out_var = value_at_risk(&dist, level);
        *out_avar = average_value_at_risk(&dist, level);
        Ok(())
    })
}

/// Writes the Riccati coefficients `K_0 ..= K_N` of the scalar LQ example
/// into `out_k`, which must hold at least `horizon + 1` doubles.
///
/// # Safety
/// `out_k` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn avar_riccati(horizon: usize, out_k: *mut f64, len: usize) -> AvarStatus {
    guard(|| {
        non_null(out_k, "out_k")?;
        let table = riccati_recursion(horizon)?;
        if len < table.k.len() {
            return Err(Failure::new(
                AvarStatus::InvalidArgument,
                format!("buffer holds {len} values, {} needed", table.k.len()),
            ));
        }
        std::slice::from_raw_parts_mut(out_k, table.k.len()).copy_from_slice(&table.k);
        Ok(())
    })
}
