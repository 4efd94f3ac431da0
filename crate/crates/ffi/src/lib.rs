//! C interface to the sparse Bregman decoder.
//!
//! Configurations and results are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! an [`SbStatus`]; on failure a description is available from
//! [`sb_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use sparse_bregman::{
    cost_curve, decode, logits_processor, logits_to_probs, renormalize, DecodeConfig, DecodeResult, Error,
    Generator, Mode, ProbVector, Search, SubProbVector, Tolerances,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbStatus {
    Ok = 0,
    NullPointer = 1,
    DomainError = 2,
    UnsupportedGenerator = 3,
    BracketError = 4,
    ConvergenceError = 5,
    GeneratorError = 6,
    InputError = 7,
    TieError = 8,
    RangeError = 9,
    SizeError = 10,
    MultipleCrossings = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbMode {
    Primal = 0,
    Dual = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbSearch {
    Binary = 0,
    Exponential = 1,
    Linear = 2,
}

impl From<SbMode> for Mode {
    fn from(m: SbMode) -> Self {
        match m {
            SbMode::Primal => Mode::Primal,
            SbMode::Dual => Mode::Dual,
        }
    }
}

/// Opaque decode configuration.
pub struct SbConfig {
    inner: DecodeConfig,
}

/// Opaque decode result.
pub struct SbResult {
    inner: DecodeResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SbStatus {
    match e {
        Error::Domain { .. } => SbStatus::DomainError,
        Error::UnsupportedGenerator(_) => SbStatus::UnsupportedGenerator,
        Error::Bracket { .. } => SbStatus::BracketError,
        Error::Convergence(_) => SbStatus::ConvergenceError,
        Error::Generator(_) => SbStatus::GeneratorError,
        Error::Input(_) => SbStatus::InputError,
        Error::Tie => SbStatus::TieError,
        Error::Range { .. } => SbStatus::RangeError,
        Error::Size { .. } => SbStatus::SizeError,
        Error::MultipleCrossings(_) => SbStatus::MultipleCrossings,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `body`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Failure>>(body: F) -> SbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SbStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} is null"));
            SbStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(format!("{}: {e}", e.name()));
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            SbStatus::Panic
        }
    }
}

unsafe fn nonnull<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn nonnull_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, what: &'static str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn generator(s: *const c_char) -> Result<Generator, Failure> {
    if s.is_null() {
        return Err(Failure::Null("generator"));
    }
    let s = CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Error::Input("generator name is not UTF-8".into()))?;
    Ok(s.parse()?)
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a configuration. `generator_name` is a real number, `shannon`, `inf` or
/// `-inf`. Defaults: no k cap, binary search, temperature 1.
///
/// # Safety
/// `generator_name` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sb_config_new(
    mode: SbMode,
    generator_name: *const c_char,
    lambda: f64,
    out: *mut *mut SbConfig,
) -> SbStatus {
    guard(|| {
        let out = nonnull_mut(out, "out")?;
        let g = generator(generator_name)?;
        let inner = DecodeConfig::new(mode.into(), g, lambda);
        *out = Box::into_raw(Box::new(SbConfig { inner }));
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from [`sb_config_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sb_config_free(cfg: *mut SbConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Caps `k*` at `k_max`; 0 removes the cap.
///
/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn sb_config_set_k_max(cfg: *mut SbConfig, k_max: usize) -> SbStatus {
    guard(|| {
        let cfg = nonnull_mut(cfg, "cfg")?;
        cfg.inner.k_max = (k_max > 0).then_some(k_max);
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn sb_config_set_search(cfg: *mut SbConfig, search: SbSearch) -> SbStatus {
    guard(|| {
        let cfg = nonnull_mut(cfg, "cfg")?;
        cfg.inner.search = match search {
            SbSearch::Binary => Search::Binary,
            SbSearch::Exponential => Search::Exponential,
            SbSearch::Linear => Search::Linear,
        };
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn sb_config_set_temperature(cfg: *mut SbConfig, temperature: f64) -> SbStatus {
    guard(|| {
        nonnull_mut(cfg, "cfg")?.inner.temperature = temperature;
        Ok(())
    })
}

/// Sets the relative tolerance of the multiplier solves.
///
/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn sb_config_set_tol(cfg: *mut SbConfig, tol: f64) -> SbStatus {
    guard(|| {
        let cfg = nonnull_mut(cfg, "cfg")?;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Input(format!("tolerance must be positive, got {tol}")).into());
        }
        cfg.inner.tol = Tolerances::with_outer(tol);
        Ok(())
    })
}

unsafe fn emit_result(r: DecodeResult, out: *mut *mut SbResult) -> Result<(), Failure> {
    let out = nonnull_mut(out, "out")?;
    *out = Box::into_raw(Box::new(SbResult { inner: r }));
    Ok(())
}

/// Decodes a probability vector of length `len`.
///
/// # Safety
/// `probs` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sb_decode(
    cfg: *const SbConfig,
    probs: *const f64,
    len: usize,
    out: *mut *mut SbResult,
) -> SbStatus {
    guard(|| {
        let cfg = nonnull(cfg, "cfg")?;
        let p = ProbVector::new(input(probs, len, "probs")?.to_vec())?;
        emit_result(decode(&p, &cfg.inner)?, out)
    })
}

/// Softmax at the configured temperature, then decode.
///
/// # Safety
/// `logits` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sb_decode_logits(
    cfg: *const SbConfig,
    logits: *const f64,
    len: usize,
    out: *mut *mut SbResult,
) -> SbStatus {
    guard(|| {
        let cfg = nonnull(cfg, "cfg")?;
        let p = logits_to_probs(input(logits, len, "logits")?, cfg.inner.temperature)?;
        emit_result(decode(&p, &cfg.inner)?, out)
    })
}

/// # Safety
/// `res` must come from a decode call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sb_result_free(res: *mut SbResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sb_result_k_star(res: *const SbResult) -> usize {
    res.as_ref().map_or(0, |r| r.inner.k_star)
}

/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sb_result_nu(res: *const SbResult) -> f64 {
    res.as_ref().map_or(f64::NAN, |r| r.inner.nu)
}

/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sb_result_cost(res: *const SbResult) -> f64 {
    res.as_ref().map_or(f64::NAN, |r| r.inner.cost)
}

/// Length of the dense probability vector.
///
/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sb_result_len(res: *const SbResult) -> usize {
    res.as_ref().map_or(0, |r| r.inner.sparse_probs.len())
}

/// Dense sparse distribution, [`sb_result_len`] entries, owned by `res`.
///
/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sb_result_probs(res: *const SbResult) -> *const f64 {
    res.as_ref().map_or(ptr::null(), |r| r.inner.sparse_probs.as_ptr())
}

/// Ascending support indices, [`sb_result_k_star`] entries, owned by `res`.
///
/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sb_result_support(res: *const SbResult) -> *const usize {
    res.as_ref().map_or(ptr::null(), |r| r.inner.support.as_ptr())
}

/// Renormalizes the sub-probability vector `x` into `out` (both `len`
/// entries) and stores the multiplier in `nu_out` when it is not null.
///
/// # Safety
/// `generator_name` must be a C string; `x` readable and `out` writable for
/// `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sb_renormalize(
    mode: SbMode,
    generator_name: *const c_char,
    x: *const f64,
    len: usize,
    out: *mut f64,
    nu_out: *mut f64,
) -> SbStatus {
    guard(|| {
        let g = generator(generator_name)?;
        let x = SubProbVector::new(input(x, len, "x")?.to_vec())?;
        let out = output(out, len, "out")?;
        let r = renormalize(mode.into(), &g, &x, &Tolerances::default())?;
        out.copy_from_slice(&r.probs);
        if let Some(nu) = nu_out.as_mut() {
            *nu = r.nu;
        }
        Ok(())
    })
}

/// Writes `cost(k)` for `k = lo..=hi` into `out`, which must hold
/// `hi - lo + 1` doubles.
///
/// # Safety
/// `probs` readable for `len` doubles; `out` writable for `hi - lo + 1`.
#[no_mangle]
pub unsafe extern "C" fn sb_cost_curve(
    cfg: *const SbConfig,
    probs: *const f64,
    len: usize,
    lo: usize,
    hi: usize,
    out: *mut f64,
) -> SbStatus {
    guard(|| {
        let cfg = nonnull(cfg, "cfg")?;
        let p = ProbVector::new(input(probs, len, "probs")?.to_vec())?;
        let curve = cost_curve(&p, &cfg.inner, lo, hi)?;
        let out = output(out, curve.entries.len(), "out")?;
        for (slot, (_, c)) in out.iter_mut().zip(curve.entries) {
            *slot = c;
        }
        Ok(())
    })
}

/// Replaces `logits` by log-probabilities on the decoded support and `-inf`
/// elsewhere, writing `len` values to `out`.
///
/// # Safety
/// `logits` readable and `out` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sb_logits_process(
    cfg: *const SbConfig,
    logits: *const f64,
    len: usize,
    out: *mut f64,
) -> SbStatus {
    guard(|| {
        let cfg = nonnull(cfg, "cfg")?;
        let processed = logits_processor(input(logits, len, "logits")?, &cfg.inner)?;
        output(out, len, "out")?.copy_from_slice(&processed);
        Ok(())
    })
}
