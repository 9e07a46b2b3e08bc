//! C ABI for `lipone`.
//!
//! Rationals cross the boundary as NUL-terminated `"p/q"` strings. Objects are
//! opaque handles released with their `_free` function; strings returned by
//! the library are released with [`lipone_string_free`]. Every fallible call
//! returns a [`LiponeStatus`]; on failure [`lipone_last_error`] describes the
//! problem for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lipone::cantor::{levelk_open, CantorStage, LevelSchedule};
use lipone::density::{sosd_certify, Verdict};
use lipone::estimator::lip_scan;
use lipone::rational::{format_rational, int, parse_rational};
use lipone::{Error, IntervalSet, LipFunction, MeasuredSet, NestedChain, Rational};

/// Result code of every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiponeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    BudgetExceeded = 5,
    TooLarge = 6,
    Panic = 7,
}

/// Outcome of a certified density check.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiponeVerdict {
    Pass = 0,
    Fail = 1,
    Inconclusive = 2,
}

/// Canonical interval set.
pub struct LiponeSet {
    inner: IntervalSet,
}

/// The function built from a nested chain.
pub struct LiponeFunction {
    inner: LipFunction,
}

/// Multi-generation Cantor-type stage on `[0, 1]`.
pub struct LiponeCantorStage {
    inner: CantorStage,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: LiponeStatus,
    message: String,
}

impl Failure {
    fn new(status: LiponeStatus, message: impl Into<String>) -> Self {
        Failure { status, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let status = match err {
            Error::Parse(_) | Error::Json(_) => LiponeStatus::Parse,
            Error::BudgetExceeded { .. } | Error::InfeasibleBudget { .. } => LiponeStatus::BudgetExceeded,
            Error::TooLarge { .. } => LiponeStatus::TooLarge,
            _ => LiponeStatus::InvalidInput,
        };
        Failure::new(status, err.to_string())
    }
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> LiponeStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            LiponeStatus::Ok
        }
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(_) => {
            set_last_error("internal panic");
            LiponeStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(LiponeStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(LiponeStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn rational(p: *const c_char, what: &str) -> Result<Rational, Failure> {
    Ok(parse_rational(text(p, what)?)?)
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::new(LiponeStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(LiponeStatus::NullPointer, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, value: String) -> Result<(), Failure> {
    let c = CString::new(value).map_err(|_| Failure::new(LiponeStatus::InvalidInput, "interior NUL"))?;
    write(out, c.into_raw())
}

/// Message for the most recent failure on this thread, or null. Owned by the
/// library and valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn lipone_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lipone_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a set from JSON (`{"parts": [...]}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lipone_set_from_json(json: *const c_char, out: *mut *mut LiponeSet) -> LiponeStatus {
    guard(|| {
        let inner = IntervalSet::from_json(text(json, "json")?)?;
        write(out, Box::into_raw(Box::new(LiponeSet { inner })))
    })
}

/// # Safety
/// `set` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lipone_set_free(set: *mut LiponeSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Canonical JSON form of the set.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lipone_set_to_json(set: *const LiponeSet, out: *mut *mut c_char) -> LiponeStatus {
    guard(|| write_string(out, handle(set, "set")?.inner.to_json()))
}

/// Lebesgue measure: `"p/q"` or `"+inf"`.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lipone_set_measure(set: *const LiponeSet, out: *mut *mut c_char) -> LiponeStatus {
    guard(|| write_string(out, handle(set, "set")?.inner.measure().to_string()))
}

/// # Safety
/// `set` must be a live handle; `x` a NUL-terminated rational; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lipone_set_contains(set: *const LiponeSet, x: *const c_char, out: *mut bool) -> LiponeStatus {
    guard(|| {
        let set = handle(set, "set")?;
        let x = rational(x, "x")?;
        write(out, set.inner.contains(&x))
    })
}

/// Certifies `max(left, right) density >= threshold` at `x` for every radius in
/// `[r_min, r_max]`, using at most `max_evaluations` window measures.
///
/// # Safety
/// `set` must be a live handle; string arguments NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lipone_set_certify_density(
    set: *const LiponeSet,
    x: *const c_char,
    r_min: *const c_char,
    r_max: *const c_char,
    threshold: *const c_char,
    max_evaluations: usize,
    out: *mut LiponeVerdict,
) -> LiponeStatus {
    guard(|| {
        let set = handle(set, "set")?;
        let cert = sosd_certify(
            &set.inner,
            &rational(x, "x")?,
            &rational(r_max, "r_max")?,
            &rational(r_min, "r_min")?,
            &rational(threshold, "threshold")?,
            max_evaluations,
        )?;
        write(
            out,
            match cert.verdict {
                Verdict::Pass => LiponeVerdict::Pass,
                Verdict::Fail => LiponeVerdict::Fail,
                Verdict::Inconclusive => LiponeVerdict::Inconclusive,
            },
        )
    })
}

/// Validates a chain (`{"stages": [set, ...]}`) and builds its function.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lipone_function_from_chain_json(
    json: *const c_char,
    out: *mut *mut LiponeFunction,
) -> LiponeStatus {
    guard(|| {
        let chain = NestedChain::from_json(text(json, "json")?)?;
        write(out, Box::into_raw(Box::new(LiponeFunction { inner: LipFunction::new(chain) })))
    })
}

/// # Safety
/// `f` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lipone_function_free(f: *mut LiponeFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of stages `N` in the chain.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lipone_function_stage_count(f: *const LiponeFunction, out: *mut u32) -> LiponeStatus {
    guard(|| write(out, handle(f, "function")?.inner.stage_count() as u32))
}

/// Exact value `f(x)`.
///
/// # Safety
/// `f` must be a live handle; `x` a NUL-terminated rational; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lipone_function_eval(
    f: *const LiponeFunction,
    x: *const c_char,
    out: *mut *mut c_char,
) -> LiponeStatus {
    guard(|| {
        let f = handle(f, "function")?;
        write_string(out, format_rational(&f.inner.eval(&rational(x, "x")?)))
    })
}

/// Exact value of the single term `f_level(x)`, `level >= 1`.
///
/// # Safety
/// `f` must be a live handle; `x` a NUL-terminated rational; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lipone_function_eval_level(
    f: *const LiponeFunction,
    level: u32,
    x: *const c_char,
    out: *mut *mut c_char,
) -> LiponeStatus {
    guard(|| {
        let f = handle(f, "function")?;
        if level == 0 {
            return Err(Failure::new(LiponeStatus::InvalidInput, "level must be at least 1"));
        }
        write_string(out, format_rational(&f.inner.eval_fn(level, &rational(x, "x")?)))
    })
}

/// Enclosures of lip f and Lip f at `x` over the radii `r_max, r_max·ratio, …`
/// down to `r_min`, as a JSON object.
///
/// # Safety
/// `f` must be a live handle; string arguments NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lipone_function_lip_scan(
    f: *const LiponeFunction,
    x: *const c_char,
    r_min: *const c_char,
    r_max: *const c_char,
    ratio: *const c_char,
    refinement: u32,
    out: *mut *mut c_char,
) -> LiponeStatus {
    guard(|| {
        let f = handle(f, "function")?;
        let estimate = lip_scan(
            &f.inner,
            &rational(x, "x")?,
            &rational(r_max, "r_max")?,
            &rational(r_min, "r_min")?,
            &rational(ratio, "ratio")?,
            refinement,
        )?;
        let json = serde_json::to_string(&estimate).map_err(Error::from)?;
        write_string(out, json)
    })
}

/// Measure of the level-`k` open set in `[0, 1]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lipone_cantor_level_measure(k: u32, out: *mut *mut c_char) -> LiponeStatus {
    guard(|| {
        let m = levelk_open(&int(0), &int(1), k)?.measure();
        write_string(out, m.to_string())
    })
}

/// Builds the stage on `[0, 1]` removing levels `levels[0..count]` generation by
/// generation; the removed measure must stay within `budget`.
///
/// # Safety
/// `levels` must point to `count` readable values; `budget` a NUL-terminated
/// rational; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lipone_cantor_stage_new(
    levels: *const u32,
    count: usize,
    budget: *const c_char,
    out: *mut *mut LiponeCantorStage,
) -> LiponeStatus {
    guard(|| {
        if levels.is_null() && count > 0 {
            return Err(Failure::new(LiponeStatus::NullPointer, "levels is null"));
        }
        let levels = if count == 0 { Vec::new() } else { std::slice::from_raw_parts(levels, count).to_vec() };
        let schedule = LevelSchedule::new(levels, rational(budget, "budget")?)?;
        let inner = CantorStage::build_f_infinity(&schedule, count as u32)?;
        write(out, Box::into_raw(Box::new(LiponeCantorStage { inner })))
    })
}

/// # Safety
/// `stage` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lipone_cantor_stage_free(stage: *mut LiponeCantorStage) {
    if !stage.is_null() {
        drop(Box::from_raw(stage));
    }
}

/// Measure of the surviving closed set.
///
/// # Safety
/// `stage` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lipone_cantor_stage_complement_measure(
    stage: *const LiponeCantorStage,
    out: *mut *mut c_char,
) -> LiponeStatus {
    guard(|| write_string(out, format_rational(&handle(stage, "stage")?.inner.complement_measure())))
}

/// Whether `x` lies in the closed set the stage keeps.
///
/// # Safety
/// `stage` must be a live handle; `x` a NUL-terminated rational; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lipone_cantor_stage_contains(
    stage: *const LiponeCantorStage,
    x: *const c_char,
    out: *mut bool,
) -> LiponeStatus {
    guard(|| {
        let stage = handle(stage, "stage")?;
        write(out, stage.inner.contains_point(&rational(x, "x")?))
    })
}
