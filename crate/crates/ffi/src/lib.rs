//! C ABI over the `pmcert` library.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns
//! a [`PmcertStatus`]; on failure `pmcert_last_error` describes the cause.
//! Strings returned through out-parameters are released with
//! `pmcert_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pmcert::error::Error;
use pmcert::io::StatsFile;
use pmcert::noise::{perturb, NoiseKind, NoiseSpec};
use pmcert::scenario::{born_table, deviation_epsilon, Epsilon, PmScenario, StatTable};
use pmcert::{catalog, overlap, report, selftest};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmcertStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    ValidityExceeded = 4,
    Degenerate = 5,
    Panic = 6,
}

/// Target scenario handle.
pub struct PmcertScenario(PmScenario);

/// Statistics table handle.
pub struct PmcertStats(StatTable);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PmcertStatus {
    match e {
        Error::Json(_) | Error::Io(_) => PmcertStatus::Parse,
        Error::ValidityExceeded { .. } => PmcertStatus::ValidityExceeded,
        Error::DegenerateConfiguration => PmcertStatus::Degenerate,
        _ => PmcertStatus::InvalidArgument,
    }
}

fn guard<F: FnOnce() -> Result<(), (PmcertStatus, String)>>(f: F) -> PmcertStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PmcertStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PmcertStatus::Panic
        }
    }
}

fn lib<T>(r: pmcert::Result<T>) -> Result<T, (PmcertStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (PmcertStatus, String) {
    (PmcertStatus::NullPointer, "null pointer argument".into())
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, (PmcertStatus, String)> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|_| (PmcertStatus::InvalidArgument, "string is not UTF-8".into()))
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, (PmcertStatus, String)> {
    p.as_ref().ok_or_else(null)
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), (PmcertStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), (PmcertStatus, String)> {
    let c = CString::new(s).map_err(|_| (PmcertStatus::Panic, "interior NUL in output".into()))?;
    write_out(out, c.into_raw())
}

/// Message for the most recent failure on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pmcert_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn pmcert_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a catalog scenario. `alpha` is used by `"biased"` only.
///
/// # Safety
/// `name` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pmcert_scenario_catalog(name: *const c_char, alpha: f64, out: *mut *mut PmcertScenario) -> PmcertStatus {
    guard(|| {
        let s = lib(catalog::by_name(str_arg(name)?, Some(alpha)))?;
        write_out(out, Box::into_raw(Box::new(PmcertScenario(s))))
    })
}

/// Parses a scenario file (`{"bloch": [...]}` or `{"kets": [...]}`).
///
/// # Safety
/// `json` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pmcert_scenario_from_json(json: *const c_char, out: *mut *mut PmcertScenario) -> PmcertStatus {
    guard(|| {
        let f: pmcert::io::ScenarioFile = lib(serde_json::from_str(str_arg(json)?).map_err(Error::from))?;
        let s = lib(f.to_scenario())?;
        write_out(out, Box::into_raw(Box::new(PmcertScenario(s))))
    })
}

/// # Safety
/// `s` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pmcert_scenario_free(s: *mut PmcertScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle; `n` and `d` writable.
#[no_mangle]
pub unsafe extern "C" fn pmcert_scenario_shape(s: *const PmcertScenario, n: *mut usize, d: *mut usize) -> PmcertStatus {
    guard(|| {
        let s = ref_arg(s)?;
        write_out(n, s.0.n())?;
        write_out(d, s.0.d())
    })
}

/// # Safety
/// `json` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pmcert_stats_from_json(json: *const c_char, out: *mut *mut PmcertStats) -> PmcertStatus {
    guard(|| {
        let f: StatsFile = lib(serde_json::from_str(str_arg(json)?).map_err(Error::from))?;
        let t = lib(f.to_table())?;
        write_out(out, Box::into_raw(Box::new(PmcertStats(t))))
    })
}

/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pmcert_stats_to_json(t: *const PmcertStats, out: *mut *mut c_char) -> PmcertStatus {
    guard(|| {
        let t = ref_arg(t)?;
        let text = lib(serde_json::to_string(&StatsFile::from_table(&t.0, None)).map_err(Error::from))?;
        write_string(out, text)
    })
}

/// # Safety
/// `t` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pmcert_stats_free(t: *mut PmcertStats) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Ideal statistics of the target.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pmcert_born_table(s: *const PmcertScenario, out: *mut *mut PmcertStats) -> PmcertStatus {
    guard(|| {
        let t = ref_arg(s)?.0.born_table();
        write_out(out, Box::into_raw(Box::new(PmcertStats(t))))
    })
}

/// Statistics of a seeded perturbation. `noise` is one of `unitary`,
/// `depolarize`, `bloch-rotate`, `smear`.
///
/// # Safety
/// `s` must be a live handle, `noise` a valid C string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pmcert_simulate(
    s: *const PmcertScenario,
    noise: *const c_char,
    delta: f64,
    seed: u64,
    out: *mut *mut PmcertStats,
) -> PmcertStatus {
    guard(|| {
        let s = ref_arg(s)?;
        let kind: NoiseKind = lib(str_arg(noise)?.parse())?;
        let real = lib(NoiseSpec::new(kind, delta).and_then(|n| perturb(&s.0, n, seed)))?;
        let t = lib(born_table(&real))?;
        write_out(out, Box::into_raw(Box::new(PmcertStats(t))))
    })
}

/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pmcert_deviation_epsilon(t: *const PmcertStats, s: *const PmcertScenario, out: *mut f64) -> PmcertStatus {
    guard(|| {
        let e = lib(deviation_epsilon(&ref_arg(t)?.0, &ref_arg(s)?.0))?;
        write_out(out, e.value())
    })
}

/// Full certification report as JSON. Returns `Ok` for vacuous bounds too;
/// the report's `status` field tells them apart.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pmcert_certify_json(s: *const PmcertScenario, t: *const PmcertStats, out: *mut *mut c_char) -> PmcertStatus {
    guard(|| {
        let r = lib(report::build_report("ffi", &ref_arg(s)?.0, &ref_arg(t)?.0, None, None))?;
        write_string(out, lib(serde_json::to_string(&r).map_err(Error::from))?)
    })
}

/// General-dimension overlap tolerances for a given ε.
///
/// # Safety
/// `state_tol` and `meas_tol` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pmcert_overlap_tolerances(eps: f64, d: usize, state_tol: *mut f64, meas_tol: *mut f64) -> PmcertStatus {
    guard(|| {
        let e = lib(Epsilon::new(eps))?;
        write_out(state_tol, overlap::state_overlap_tol(e, d))?;
        write_out(meas_tol, overlap::measurement_overlap_tol(e, d))
    })
}

/// Threshold of the average state-fidelity bound for a qubit scenario.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pmcert_epsilon0(s: *const PmcertScenario, out: *mut f64) -> PmcertStatus {
    guard(|| {
        let s = &ref_arg(s)?.0;
        let sel = lib(selftest::select_subset(s))?;
        write_out(out, selftest::epsilon0(&sel, s.n()))
    })
}

/// Small-ε slope of the average state-fidelity bound.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pmcert_asymptotic_constant(s: *const PmcertScenario, out: *mut f64) -> PmcertStatus {
    guard(|| {
        let s = &ref_arg(s)?.0;
        let sel = lib(selftest::select_subset(s))?;
        write_out(out, lib(selftest::asymptotic_constant(s, &sel))?)
    })
}

/// Procrustes-route average fidelity lower bound over the outcome-0 states.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pmcert_procrustes_bound(s: *const PmcertScenario, eps: f64, out: *mut f64) -> PmcertStatus {
    guard(|| {
        let rows = lib(selftest::outcome0_rows(&ref_arg(s)?.0))?;
        let b = lib(pmcert::alignment::procrustes_bound(eps, &rows))?;
        write_out(out, b.fidelity_lower)
    })
}
