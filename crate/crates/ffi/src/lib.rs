//! C ABI over the `superlase` library.
//!
//! Parameter sets live behind an opaque `SlParams` handle created by one of
//! the `sl_params_*` constructors and released with `sl_params_free`. Every
//! fallible call returns an `SlStatus` and writes its result through an out
//! pointer; on failure a description is kept per thread and can be read
//! with `sl_last_error_message`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use superlase::config::{load_config, paper_config, parse_config};
use superlase::dicke::{self, Phase};
use superlase::gain;
use superlase::{derive, DerivedParams, Error};

/// Opaque parameter set.
pub struct SlParams {
    inner: DerivedParams,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    Config = 4,
    Io = 5,
    Singular = 6,
    NoMinimum = 7,
    Bracket = 8,
    Integration = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlPhase {
    Normal = 0,
    Superradiant = 1,
    Critical = 2,
}

/// Closed-form steady state. Complex amplitudes are split into re/im.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlSteadyState {
    pub a1_re: f64,
    pub a1_im: f64,
    pub a2_re: f64,
    pub a2_im: f64,
    pub j_minus_re: f64,
    pub j_minus_im: f64,
    pub j_z: f64,
    pub photons_cavity2: f64,
    pub phase: SlPhase,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlGainBreakdown {
    pub delta_n: f64,
    pub g0: f64,
    pub g1: f64,
    pub gain: f64,
    pub freq_pull: f64,
    pub drive_re: f64,
    pub drive_im: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n_b: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    // Interior NULs cannot be represented; replace them.
    let c = CString::new(msg.replace('\0', "?")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SlStatus {
    match e {
        Error::Domain(_) | Error::Spec(_) => SlStatus::Domain,
        Error::Config { .. } => SlStatus::Config,
        Error::Io(_) => SlStatus::Io,
        Error::Singular { .. } => SlStatus::Singular,
        Error::NoMinimum(_) => SlStatus::NoMinimum,
        Error::Bracket { .. } => SlStatus::Bracket,
        Error::Stiffness { .. } | Error::StepLimit { .. } | Error::Divergence { .. } | Error::NoConvergence { .. } => {
            SlStatus::Integration
        }
    }
}

/// Failure inside a wrapper body, before it is turned into a status.
enum Fail {
    Null(&'static str),
    Utf8,
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Run `body`, translating errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Fail>>(body: F) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SlStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            SlStatus::NullPointer
        }
        Ok(Err(Fail::Utf8)) => {
            set_last_error("string argument is not valid UTF-8".into());
            SlStatus::InvalidUtf8
        }
        Ok(Err(Fail::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            SlStatus::Panic
        }
    }
}

unsafe fn handle<'a>(p: *const SlParams) -> Result<&'a DerivedParams, Fail> {
    p.as_ref().map(|h| &h.inner).ok_or(Fail::Null("params"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    out.write(value);
    Ok(())
}

unsafe fn c_str<'a>(s: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Fail::Utf8)
}

/// Box `p` into a handle at `out`; checks `out` first so nothing leaks.
unsafe fn write_handle(out: *mut *mut SlParams, p: DerivedParams) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    out.write(Box::into_raw(Box::new(SlParams { inner: p })));
    Ok(())
}

/// Message of the last failed call on this thread, or NULL if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated name of a status code; "unknown" for values
/// outside `SlStatus`.
#[no_mangle]
pub extern "C" fn sl_status_name(status: i32) -> *const c_char {
    let name: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"null pointer\0",
        2 => b"invalid utf-8\0",
        3 => b"domain error\0",
        4 => b"config error\0",
        5 => b"io error\0",
        6 => b"singular point\0",
        7 => b"no minimum\0",
        8 => b"no bracket\0",
        9 => b"integration failure\0",
        10 => b"internal panic\0",
        _ => b"unknown\0",
    };
    name.as_ptr().cast()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Bundled ⁸⁷Rb parameter set.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sl_params_paper(out: *mut *mut SlParams) -> SlStatus {
    guard(|| {
        let p = derive(paper_config())?;
        write_handle(out, p)
    })
}

/// Parse a parameter file's contents (sectioned `key_unit = value`).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` as for `sl_params_paper`.
#[no_mangle]
pub unsafe extern "C" fn sl_params_from_str(text: *const c_char, out: *mut *mut SlParams) -> SlStatus {
    guard(|| {
        let p = derive(parse_config(c_str(text, "text")?)?)?;
        write_handle(out, p)
    })
}

/// Load a parameter file from disk.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` as for `sl_params_paper`.
#[no_mangle]
pub unsafe extern "C" fn sl_params_from_file(path: *const c_char, out: *mut *mut SlParams) -> SlStatus {
    guard(|| {
        let p = derive(load_config(c_str(path, "path")?)?)?;
        write_handle(out, p)
    })
}

/// Copy of `params` with the pump–cavity detuning replaced (rad/s).
///
/// # Safety
/// `params` must be a live handle; `out` as for `sl_params_paper`.
#[no_mangle]
pub unsafe extern "C" fn sl_params_with_detuning(
    params: *const SlParams,
    detuning: f64,
    out: *mut *mut SlParams,
) -> SlStatus {
    guard(|| {
        let q = handle(params)?.with_detuning(detuning)?;
        write_handle(out, q)
    })
}

/// Release a handle. NULL is ignored.
///
/// # Safety
/// `params` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_params_free(params: *mut SlParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Recoil frequency ħk²/2m (rad/s).
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_recoil_frequency(params: *const SlParams, out: *mut f64) -> SlStatus {
    guard(|| write(out, handle(params)?.recoil_freq()))
}

/// Critical coupling λ_c (rad/s).
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_critical_coupling(params: *const SlParams, out: *mut f64) -> SlStatus {
    guard(|| write(out, dicke::critical_coupling(handle(params)?)?))
}

/// Detuning in [lo, hi] (rad/s) minimizing λ_c, found from a `grid`-point
/// scan refined by golden-section search.
///
/// # Safety
/// `params` must be a live handle; both out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_minimize_critical_coupling(
    params: *const SlParams,
    lo: f64,
    hi: f64,
    grid: usize,
    out_detuning: *mut f64,
    out_lambda_c: *mut f64,
) -> SlStatus {
    guard(|| {
        if out_detuning.is_null() || out_lambda_c.is_null() {
            return Err(Fail::Null("out"));
        }
        let m = dicke::minimize_critical_coupling(handle(params)?, lo, hi, grid)?;
        write(out_detuning, m.detuning)?;
        write(out_lambda_c, m.lambda_c)
    })
}

/// Photons in the atom cavity, |a2|², at coupling `lambda` (rad/s).
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_intracavity_photons(params: *const SlParams, lambda: f64, out: *mut f64) -> SlStatus {
    guard(|| write(out, dicke::intracavity_photons(handle(params)?, lambda)?))
}

/// Closed-form steady state at coupling `lambda` (rad/s).
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_steady_state(params: *const SlParams, lambda: f64, out: *mut SlSteadyState) -> SlStatus {
    guard(|| {
        let s = dicke::steady_state(handle(params)?, lambda)?;
        write(
            out,
            SlSteadyState {
                a1_re: s.a1.re,
                a1_im: s.a1.im,
                a2_re: s.a2.re,
                a2_im: s.a2.im,
                j_minus_re: s.j_minus.re,
                j_minus_im: s.j_minus.im,
                j_z: s.j_z,
                photons_cavity2: s.photons_cavity2,
                phase: match s.phase {
                    Phase::Normal => SlPhase::Normal,
                    Phase::Superradiant => SlPhase::Superradiant,
                    Phase::Critical => SlPhase::Critical,
                },
            },
        )
    })
}

/// Mechanical gain and its ingredients at coupling `lambda` (rad/s).
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_mechanical_gain(
    params: *const SlParams,
    lambda: f64,
    out: *mut SlGainBreakdown,
) -> SlStatus {
    guard(|| {
        let g = gain::mechanical_gain(handle(params)?, lambda)?;
        write(
            out,
            SlGainBreakdown {
                delta_n: g.delta_n,
                g0: g.g0_term,
                g1: g.g1_term,
                gain: g.gain,
                freq_pull: g.freq_pull,
                drive_re: g.drive_c.re,
                drive_im: g.drive_c.im,
                alpha: g.alpha,
                beta: g.beta,
                n_b: g.n_b,
            },
        )
    })
}

/// Lasing threshold λ_th (rad/s) searched over the default bracket
/// [1.001 λ_c, 20 λ_c].
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_threshold_coupling(params: *const SlParams, out: *mut f64) -> SlStatus {
    guard(|| write(out, gain::threshold_coupling(handle(params)?, None)?))
}

/// Lasing threshold searched over the bracket [lo, hi] (rad/s).
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_threshold_coupling_in(
    params: *const SlParams,
    lo: f64,
    hi: f64,
    out: *mut f64,
) -> SlStatus {
    guard(|| write(out, gain::threshold_coupling(handle(params)?, Some((lo, hi)))?))
}

/// Pump power (W) needed for coupling `lambda` (rad/s).
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_pump_power(params: *const SlParams, lambda: f64, out: *mut f64) -> SlStatus {
    guard(|| write(out, gain::pump_power(lambda, handle(params)?)?))
}

/// Stimulated phonon number exp(2(G − γ_m)/γ_m). Pure; never fails.
#[no_mangle]
pub extern "C" fn sl_phonon_number(gain: f64, gamma_m: f64) -> f64 {
    gain::phonon_number(gain, gamma_m)
}
