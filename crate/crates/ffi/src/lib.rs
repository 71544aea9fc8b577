//! C interface to `qca-core`.
//!
//! Rules live behind the opaque `QcaRule` handle. Every entry point returns a
//! [`QcaStatus`]; on failure `qca_last_error` describes what went wrong on
//! the calling thread. Strings handed out by the library are released with
//! `qca_string_free`, rules with `qca_rule_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qca_core::clifford::{evolve_pauli, validate_clifford, CliffordRuleSpec, PauliString};
use qca_core::io::{parse_rule, rule_to_json};
use qca_core::linalg::{c, CMat};
use qca_core::rules::{compose, validate_rule, LocalRule};
use qca_core::walks::{lift_coined_walk, walk_sector_evolve, CoinedWalkSpec};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Schema = 3,
    CheckFailed = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Opaque rule handle.
pub struct QcaRule {
    inner: LocalRule,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: QcaStatus, msg: impl Into<String>) -> QcaStatus {
    let text = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
    status
}

fn guard(f: impl FnOnce() -> QcaStatus) -> QcaStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::default());
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(QcaStatus::Panic, "internal panic"))
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, QcaStatus> {
    if p.is_null() {
        return Err(fail(QcaStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(QcaStatus::InvalidUtf8, "argument is not UTF-8"))
}

unsafe fn hand_out(s: String, out: *mut *mut c_char) -> QcaStatus {
    match CString::new(s) {
        Ok(cs) => {
            *out = cs.into_raw();
            QcaStatus::Ok
        }
        Err(_) => fail(QcaStatus::Panic, "output contains a NUL byte"),
    }
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn qca_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn qca_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a JSON rule file.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qca_rule_from_json(json: *const c_char, out: *mut *mut QcaRule) -> QcaStatus {
    guard(|| {
        if out.is_null() {
            return fail(QcaStatus::NullPointer, "null output pointer");
        }
        let src = try_status!(text(json));
        match parse_rule(src) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(QcaRule { inner }));
                QcaStatus::Ok
            }
            Err(e) => fail(QcaStatus::Schema, e.to_string()),
        }
    })
}

/// # Safety
/// `rule` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qca_rule_free(rule: *mut QcaRule) {
    if !rule.is_null() {
        drop(Box::from_raw(rule));
    }
}

unsafe fn borrow<'a>(rule: *const QcaRule) -> Result<&'a LocalRule, QcaStatus> {
    rule.as_ref()
        .map(|r| &r.inner)
        .ok_or_else(|| fail(QcaStatus::NullPointer, "null rule handle"))
}

/// # Safety
/// `rule` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qca_rule_cell_dim(rule: *const QcaRule, out: *mut usize) -> QcaStatus {
    guard(|| {
        let r = try_status!(borrow(rule));
        if out.is_null() {
            return fail(QcaStatus::NullPointer, "null output pointer");
        }
        *out = r.cell_dim;
        QcaStatus::Ok
    })
}

/// Validate a rule. `worst_residual` (may be null) receives the largest
/// homomorphism or commutator residual; the status is `CheckFailed` when it
/// exceeds the tolerance.
///
/// # Safety
/// `rule` must be a live handle; `worst_residual` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qca_rule_validate(rule: *const QcaRule, worst_residual: *mut f64) -> QcaStatus {
    guard(|| {
        let r = try_status!(borrow(rule));
        let report = match validate_rule(r) {
            Ok(rep) => rep,
            Err(e) => return fail(QcaStatus::CheckFailed, e.to_string()),
        };
        let worst = report
            .offsets
            .iter()
            .map(|(_, x)| *x)
            .fold(report.homomorphism_residual, f64::max);
        if !worst_residual.is_null() {
            *worst_residual = worst;
        }
        if report.is_valid() {
            QcaStatus::Ok
        } else {
            fail(QcaStatus::CheckFailed, format!("residual {worst:.3e}"))
        }
    })
}

/// `first ∘ second`: the image of an observable under `second`, then `first`.
///
/// # Safety
/// Both handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qca_rule_compose(
    first: *const QcaRule,
    second: *const QcaRule,
    out: *mut *mut QcaRule,
) -> QcaStatus {
    guard(|| {
        let (a, b) = (try_status!(borrow(first)), try_status!(borrow(second)));
        if out.is_null() {
            return fail(QcaStatus::NullPointer, "null output pointer");
        }
        match compose(a, b) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(QcaRule { inner }));
                QcaStatus::Ok
            }
            Err(e) => fail(QcaStatus::CheckFailed, e.to_string()),
        }
    })
}

/// Explicit JSON rule file for a handle.
///
/// # Safety
/// `rule` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qca_rule_to_json(rule: *const QcaRule, out: *mut *mut c_char) -> QcaStatus {
    guard(|| {
        let r = try_status!(borrow(rule));
        if out.is_null() {
            return fail(QcaStatus::NullPointer, "null output pointer");
        }
        hand_out(rule_to_json(r), out)
    })
}

/// Evolve a Pauli word (e.g. `"x"`, `"-i zyz@-1"`) under the Clifford rule
/// with images `xi` of X and `eta` of Y, one line per step.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qca_clifford_evolve(
    xi: *const c_char,
    eta: *const c_char,
    pauli: *const c_char,
    steps: usize,
    out: *mut *mut c_char,
) -> QcaStatus {
    guard(|| {
        let (xi, eta, word) = (try_status!(text(xi)), try_status!(text(eta)), try_status!(text(pauli)));
        if out.is_null() {
            return fail(QcaStatus::NullPointer, "null output pointer");
        }
        let spec = match CliffordRuleSpec::parse(xi, eta) {
            Ok(s) => s,
            Err(e) => return fail(QcaStatus::Schema, e.to_string()),
        };
        if !validate_clifford(&spec) {
            return fail(QcaStatus::CheckFailed, "not a Clifford rule");
        }
        let mut p: PauliString = match word.parse() {
            Ok(p) => p,
            Err(e) => return fail(QcaStatus::Schema, format!("{e}")),
        };
        let mut lines = String::new();
        for t in 0..=steps {
            lines.push_str(&format!("{t}\t{p}\n"));
            p = evolve_pauli(&spec, &p, 1);
        }
        hand_out(lines, out)
    })
}

/// Final site distribution of a coined walk on a ring of `length` sites.
/// `coin` holds the 2 × 2 coin as 8 doubles (row-major re, im pairs),
/// `amplitudes` the (R, L) amplitudes at ring position `start` as 4 doubles.
/// Wrapping around the ring is allowed.
///
/// # Safety
/// `coin` must point to 8 doubles, `amplitudes` to 4, `out` to `out_len`.
#[no_mangle]
pub unsafe extern "C" fn qca_walk_distribution(
    coin: *const f64,
    amplitudes: *const f64,
    start: i64,
    steps: usize,
    length: usize,
    out: *mut f64,
    out_len: usize,
) -> QcaStatus {
    guard(|| {
        if coin.is_null() || amplitudes.is_null() || out.is_null() {
            return fail(QcaStatus::NullPointer, "null array argument");
        }
        if out_len < length {
            return fail(QcaStatus::BufferTooSmall, format!("need {length} slots"));
        }
        let cf = std::slice::from_raw_parts(coin, 8);
        let am = std::slice::from_raw_parts(amplitudes, 4);
        let w = CMat::from_fn(2, 2, |i, j| c(cf[4 * i + 2 * j], cf[4 * i + 2 * j + 1]));
        let rule = match lift_coined_walk(&w) {
            Ok(r) => r,
            Err(e) => return fail(QcaStatus::CheckFailed, e.to_string()),
        };
        let mut spec = CoinedWalkSpec::new(w, steps, start, [c(am[0], am[1]), c(am[2], am[3])], length);
        spec.allow_wrap = true;
        match walk_sector_evolve(&rule, &spec) {
            Ok(rows) => {
                let last = rows.last().expect("t = 0 row is always present");
                std::slice::from_raw_parts_mut(out, length).copy_from_slice(last);
                QcaStatus::Ok
            }
            Err(e) => fail(QcaStatus::CheckFailed, e.to_string()),
        }
    })
}
