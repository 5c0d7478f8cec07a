//! Exercises the C ABI through its Rust signatures: handles, out pointers,
//! status codes and the per-thread error message.

use std::ffi::{CStr, CString};
use std::ptr;

use superlase::config::paper_config;
use superlase::{derive, dicke, gain};
use superlase_ffi::*;

struct Handle(*mut SlParams);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { sl_params_free(self.0) };
    }
}

fn paper() -> Handle {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sl_params_paper(&mut h) }, SlStatus::Ok);
    assert!(!h.is_null());
    Handle(h)
}

fn last_error() -> String {
    let p = sl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

#[test]
fn values_match_the_library() {
    let h = paper();
    let p = derive(paper_config()).unwrap();

    let mut lc = 0.0;
    assert_eq!(unsafe { sl_critical_coupling(h.0, &mut lc) }, SlStatus::Ok);
    assert_eq!(lc, dicke::critical_coupling(&p).unwrap());

    let mut wr = 0.0;
    assert_eq!(unsafe { sl_recoil_frequency(h.0, &mut wr) }, SlStatus::Ok);
    assert_eq!(wr, p.recoil_freq());

    let mut photons = 0.0;
    assert_eq!(unsafe { sl_intracavity_photons(h.0, 7.6e6, &mut photons) }, SlStatus::Ok);
    assert_eq!(photons, dicke::intracavity_photons(&p, 7.6e6).unwrap());

    let mut th = 0.0;
    assert_eq!(unsafe { sl_threshold_coupling(h.0, &mut th) }, SlStatus::Ok);
    assert_eq!(th, gain::threshold_coupling(&p, None).unwrap());

    let mut power = 0.0;
    assert_eq!(unsafe { sl_pump_power(h.0, th, &mut power) }, SlStatus::Ok);
    assert_eq!(power, gain::pump_power(th, &p).unwrap());

    assert_eq!(sl_phonon_number(100.0, 100.0), 1.0);
    assert_eq!(sl_phonon_number(200.0, 100.0), 2f64.exp());
}

#[test]
fn structs_carry_every_field() {
    let h = paper();
    let p = derive(paper_config()).unwrap();
    let lambda = 3e6;

    let mut ss = std::mem::MaybeUninit::<SlSteadyState>::uninit();
    assert_eq!(unsafe { sl_steady_state(h.0, lambda, ss.as_mut_ptr()) }, SlStatus::Ok);
    let ss = unsafe { ss.assume_init() };
    let expected = dicke::steady_state(&p, lambda).unwrap();
    assert_eq!((ss.a1_re, ss.a1_im), (expected.a1.re, expected.a1.im));
    assert_eq!((ss.a2_re, ss.a2_im), (expected.a2.re, expected.a2.im));
    assert_eq!((ss.j_minus_re, ss.j_minus_im), (expected.j_minus.re, expected.j_minus.im));
    assert_eq!(ss.j_z, expected.j_z);
    assert_eq!(ss.photons_cavity2, expected.photons_cavity2);
    assert_eq!(ss.phase, SlPhase::Superradiant);

    let mut below = std::mem::MaybeUninit::<SlSteadyState>::uninit();
    assert_eq!(unsafe { sl_steady_state(h.0, 1e5, below.as_mut_ptr()) }, SlStatus::Ok);
    assert_eq!(unsafe { below.assume_init() }.phase, SlPhase::Normal);

    let mut gb = std::mem::MaybeUninit::<SlGainBreakdown>::uninit();
    assert_eq!(unsafe { sl_mechanical_gain(h.0, lambda, gb.as_mut_ptr()) }, SlStatus::Ok);
    let gb = unsafe { gb.assume_init() };
    let e = gain::mechanical_gain(&p, lambda).unwrap();
    assert_eq!(
        [gb.delta_n, gb.g0, gb.g1, gb.gain, gb.freq_pull, gb.drive_re, gb.drive_im, gb.alpha, gb.beta, gb.n_b],
        [e.delta_n, e.g0_term, e.g1_term, e.gain, e.freq_pull, e.drive_c.re, e.drive_c.im, e.alpha, e.beta, e.n_b]
    );
}

#[test]
fn detuning_copy_is_independent() {
    let h = paper();
    let mut q = ptr::null_mut();
    let wm = paper_config().mech_freq;
    assert_eq!(unsafe { sl_params_with_detuning(h.0, 0.3 * wm, &mut q) }, SlStatus::Ok);
    let q = Handle(q);

    let (mut a, mut b) = (0.0, 0.0);
    unsafe {
        sl_critical_coupling(h.0, &mut a);
        sl_critical_coupling(q.0, &mut b);
    }
    let p = derive(paper_config()).unwrap();
    assert_eq!(b, dicke::critical_coupling_at(&p, 0.3 * wm).unwrap());
    assert_ne!(a, b);
}

#[test]
fn minimize_writes_both_outputs() {
    let h = paper();
    let wm = paper_config().mech_freq;
    let (mut d, mut l) = (0.0, 0.0);
    let st = unsafe { sl_minimize_critical_coupling(h.0, 0.05 * wm, wm, 400, &mut d, &mut l) };
    assert_eq!(st, SlStatus::Ok);
    let p = derive(paper_config()).unwrap();
    let m = dicke::minimize_critical_coupling(&p, 0.05 * wm, wm, 400).unwrap();
    assert_eq!((d, l), (m.detuning, m.lambda_c));

    let st = unsafe { sl_minimize_critical_coupling(h.0, 0.05 * wm, wm, 400, ptr::null_mut(), &mut l) };
    assert_eq!(st, SlStatus::NullPointer);
}

#[test]
fn null_pointers_are_reported() {
    let mut x = 0.0;
    assert_eq!(unsafe { sl_critical_coupling(ptr::null(), &mut x) }, SlStatus::NullPointer);
    assert_eq!(last_error(), "null pointer: params");

    let h = paper();
    assert_eq!(unsafe { sl_critical_coupling(h.0, ptr::null_mut()) }, SlStatus::NullPointer);
    assert_eq!(last_error(), "null pointer: out");

    assert_eq!(unsafe { sl_params_paper(ptr::null_mut()) }, SlStatus::NullPointer);
    assert_eq!(unsafe { sl_params_from_str(ptr::null(), &mut ptr::null_mut()) }, SlStatus::NullPointer);
    unsafe { sl_params_free(ptr::null_mut()) };
}

#[test]
fn library_errors_map_to_statuses() {
    let h = paper();
    let mut x = 0.0;

    // Empty bracket below λ_c: no sign change of G − γ_m.
    let st = unsafe { sl_threshold_coupling_in(h.0, 1.0, 2.0, &mut x) };
    assert_eq!(st, SlStatus::Bracket);
    assert!(last_error().contains("no sign change"), "{}", last_error());

    let st = unsafe { sl_threshold_coupling_in(h.0, 2.0, 1.0, &mut x) };
    assert_eq!(st, SlStatus::Domain);

    // λ_c is singular at zero detuning when NU0 = 0.
    let text = superlase::config::PAPER_CFG
        .replace("collective_stark_nu0_two_pi_hz = -2e6", "collective_stark_nu0_two_pi_hz = 0");
    assert_ne!(text, superlase::config::PAPER_CFG, "preset line not found");
    let text = CString::new(text).unwrap();
    let mut q = ptr::null_mut();
    assert_eq!(unsafe { sl_params_from_str(text.as_ptr(), &mut q) }, SlStatus::Ok);
    let q = Handle(q);
    let mut z = ptr::null_mut();
    assert_eq!(unsafe { sl_params_with_detuning(q.0, 0.0, &mut z) }, SlStatus::Ok);
    let z = Handle(z);
    assert_eq!(unsafe { sl_critical_coupling(z.0, &mut x) }, SlStatus::Singular);
    assert!(last_error().starts_with("singular point"));
}

#[test]
fn config_errors_carry_line_numbers() {
    let text = CString::new("[atoms]\nn_atoms_count = lots\n").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sl_params_from_str(text.as_ptr(), &mut h) }, SlStatus::Config);
    assert!(h.is_null());
    assert!(last_error().contains("line 2"), "{}", last_error());

    let bad = [0xffu8, 0];
    let st = unsafe { sl_params_from_str(bad.as_ptr().cast(), &mut h) };
    assert_eq!(st, SlStatus::InvalidUtf8);

    let missing = CString::new("/nonexistent/superlase.cfg").unwrap();
    assert_eq!(unsafe { sl_params_from_file(missing.as_ptr(), &mut h) }, SlStatus::Config);
}

#[test]
fn file_round_trip() {
    let dir = std::env::temp_dir().join(format!("superlase-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("paper.cfg");
    std::fs::write(&path, superlase::config::PAPER_CFG).unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sl_params_from_file(c.as_ptr(), &mut h) }, SlStatus::Ok);
    let h = Handle(h);
    let (mut a, mut b) = (0.0, 0.0);
    let p = paper();
    unsafe {
        sl_critical_coupling(h.0, &mut a);
        sl_critical_coupling(p.0, &mut b);
    }
    assert_eq!(a, b);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn error_message_is_per_thread() {
    let mut x = 0.0;
    assert_eq!(unsafe { sl_critical_coupling(ptr::null(), &mut x) }, SlStatus::NullPointer);
    std::thread::spawn(|| assert!(sl_last_error_message().is_null())).join().unwrap();
    assert_eq!(last_error(), "null pointer: params");
}

#[test]
fn status_names_and_version() {
    let name = |s: i32| unsafe { CStr::from_ptr(sl_status_name(s)) }.to_str().unwrap();
    assert_eq!(name(SlStatus::Ok as i32), "ok");
    assert_eq!(name(SlStatus::Singular as i32), "singular point");
    assert_eq!(name(SlStatus::Panic as i32), "internal panic");
    assert_eq!(name(-1), "unknown");
    assert_eq!(name(11), "unknown");
    let v = unsafe { CStr::from_ptr(sl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/superlase.h");
    for f in [
        "sl_last_error_message",
        "sl_status_name",
        "sl_version",
        "sl_params_paper",
        "sl_params_from_str",
        "sl_params_from_file",
        "sl_params_with_detuning",
        "sl_params_free",
        "sl_recoil_frequency",
        "sl_critical_coupling",
        "sl_minimize_critical_coupling",
        "sl_intracavity_photons",
        "sl_steady_state",
        "sl_mechanical_gain",
        "sl_threshold_coupling",
        "sl_threshold_coupling_in",
        "sl_pump_power",
        "sl_phonon_number",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct SlParams SlParams;"));
    assert!(header.contains("SL_STATUS_SINGULAR = 6"));
}
