//! Time-domain mean-field dynamics.
//!
//! Two state layouts are supported: the bare two-cavity picture
//! (a1, a2, J₋, J_z) and the optical supermode picture
//! (a₊, a₋, J₋, J_z, b) that also carries the mechanical amplitude.
//! Complex amplitudes are flattened to interleaved (re, im) pairs so a
//! single real integrator serves both.

pub mod integrator;

use std::io::Write;

use num_complex::Complex64;

use crate::dicke::{self, Phase, SteadyState};
use crate::error::{Error, Result};
use crate::format::fmt_f64;
use crate::params::DerivedParams;
pub use integrator::{Dopri5, OdeSystem, StepStats, StepperOptions};

/// Smallest step before an integration is declared stiff (s).
pub const MIN_STEP: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    /// Bare cavity modes a1, a2 without the mechanical mode.
    TwoCavity,
    /// Supermodes a± = (a1 ± a2)/√2 plus the mechanical mode b.
    Supermode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoCavityState {
    pub a1: Complex64,
    pub a2: Complex64,
    pub j_minus: Complex64,
    pub j_z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupermodeState {
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub j_minus: Complex64,
    pub j_z: f64,
    pub b: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemState {
    TwoCavity(TwoCavityState),
    Supermode(SupermodeState),
}

impl TwoCavityState {
    pub const DIM: usize = 7;

    pub fn from_steady(s: &SteadyState) -> Self {
        TwoCavityState { a1: s.a1, a2: s.a2, j_minus: s.j_minus, j_z: s.j_z }
    }

    pub fn to_supermode(&self, b: Complex64) -> SupermodeState {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        SupermodeState {
            a_plus: (self.a1 + self.a2) * r,
            a_minus: (self.a1 - self.a2) * r,
            j_minus: self.j_minus,
            j_z: self.j_z,
            b,
        }
    }

    /// |J₋|² + J_z².
    pub fn spin_length_sq(&self) -> f64 {
        self.j_minus.norm_sqr() + self.j_z * self.j_z
    }

    pub fn write_flat(&self, y: &mut [f64]) {
        y[0] = self.a1.re;
        y[1] = self.a1.im;
        y[2] = self.a2.re;
        y[3] = self.a2.im;
        y[4] = self.j_minus.re;
        y[5] = self.j_minus.im;
        y[6] = self.j_z;
    }

    pub fn from_flat(y: &[f64]) -> Self {
        TwoCavityState {
            a1: Complex64::new(y[0], y[1]),
            a2: Complex64::new(y[2], y[3]),
            j_minus: Complex64::new(y[4], y[5]),
            j_z: y[6],
        }
    }
}

impl SupermodeState {
    pub const DIM: usize = 9;

    pub fn to_two_cavity(&self) -> TwoCavityState {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        TwoCavityState {
            a1: (self.a_plus + self.a_minus) * r,
            a2: (self.a_plus - self.a_minus) * r,
            j_minus: self.j_minus,
            j_z: self.j_z,
        }
    }

    pub fn write_flat(&self, y: &mut [f64]) {
        y[0] = self.a_plus.re;
        y[1] = self.a_plus.im;
        y[2] = self.a_minus.re;
        y[3] = self.a_minus.im;
        y[4] = self.j_minus.re;
        y[5] = self.j_minus.im;
        y[6] = self.j_z;
        y[7] = self.b.re;
        y[8] = self.b.im;
    }

    pub fn from_flat(y: &[f64]) -> Self {
        SupermodeState {
            a_plus: Complex64::new(y[0], y[1]),
            a_minus: Complex64::new(y[2], y[3]),
            j_minus: Complex64::new(y[4], y[5]),
            j_z: y[6],
            b: Complex64::new(y[7], y[8]),
        }
    }
}

impl SystemState {
    pub fn picture(&self) -> Picture {
        match self {
            SystemState::TwoCavity(_) => Picture::TwoCavity,
            SystemState::Supermode(_) => Picture::Supermode,
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        match self {
            SystemState::TwoCavity(s) => {
                let mut y = vec![0.0; TwoCavityState::DIM];
                s.write_flat(&mut y);
                y
            }
            SystemState::Supermode(s) => {
                let mut y = vec![0.0; SupermodeState::DIM];
                s.write_flat(&mut y);
                y
            }
        }
    }

    pub fn from_flat(picture: Picture, y: &[f64]) -> Self {
        match picture {
            Picture::TwoCavity => SystemState::TwoCavity(TwoCavityState::from_flat(y)),
            Picture::Supermode => SystemState::Supermode(SupermodeState::from_flat(y)),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|v| v.is_finite())
    }
}

/// Time derivative of the two-cavity mean-field equations (no mechanics):
///
/// ```text
/// ȧ1  = (iΔc − γ)a1 − i g a2
/// ȧ2  = (iΔ′c − γ)a2 − i g a1 − (iλ/√N)(J₊ + J₋)
/// J̇₋  = −iω_r J₋ + (2iλ/√N) J_z (a2* + a2)
/// J̇_z = (iλ/√N)(J₋ − J₊)(a2* + a2)
/// ```
pub fn rhs_dicke(s: &TwoCavityState, p: &DerivedParams, lambda: f64) -> TwoCavityState {
    let raw = p.raw();
    let i = Complex64::i();
    let gamma = raw.cavity_loss;
    let g = raw.cavity_coupling;
    let coupling = lambda / raw.n_atoms.sqrt();

    let j_plus = s.j_minus.conj();
    let x2 = 2.0 * s.a2.re; // a2* + a2
    let spin_x = 2.0 * s.j_minus.re; // J₊ + J₋

    let a1_dot = Complex64::new(-gamma, raw.pump_cavity_detuning) * s.a1 - i * g * s.a2;
    let a2_dot = Complex64::new(-gamma, p.detuning_prime()) * s.a2 - i * g * s.a1 - i * coupling * spin_x;
    let j_minus_dot = -i * p.recoil_freq() * s.j_minus + i * 2.0 * coupling * s.j_z * x2;
    // (J₋ − J₊) = 2i·Im J₋, so i(J₋ − J₊) = −2 Im J₋
    let j_z_dot = (i * coupling * (s.j_minus - j_plus) * x2).re;

    TwoCavityState { a1: a1_dot, a2: a2_dot, j_minus: j_minus_dot, j_z: j_z_dot }
}

/// Time derivative of the supermode equations including the mechanical
/// mode, under the rotating-wave approximation 2g + ω_m, ω_m ≫ |2g − ω_m|.
pub fn rhs_supermode(s: &SupermodeState, p: &DerivedParams, lambda: f64) -> SupermodeState {
    let raw = p.raw();
    let i = Complex64::i();
    let gamma = raw.cavity_loss;
    let chi = raw.com_coupling;
    let nu0 = raw.collective_stark_nu0;
    let n = raw.n_atoms;
    let w = p.supermode_freqs();

    let spin_x = Complex64::new(2.0 * s.j_minus.re, 0.0); // J₊ + J₋
    let j_plus = s.j_minus.conj();
    // a₊* + a₊ − a₋* − a₋
    let field_x = 2.0 * (s.a_plus.re - s.a_minus.re);
    let drive = lambda / (2.0 * n).sqrt();

    let a_plus_dot =
        i * (nu0 + 2.0 * chi * s.b) / 4.0 * s.a_minus - Complex64::new(gamma, w.plus) * s.a_plus - i * drive * spin_x;
    let a_minus_dot = i * (nu0 + 2.0 * chi * s.b.conj()) / 4.0 * s.a_plus - Complex64::new(gamma, w.minus) * s.a_minus
        + i * drive * spin_x;
    let b_dot = Complex64::new(-raw.mech_damping, -raw.mech_freq) * s.b + i * chi / 2.0 * s.a_minus.conj() * s.a_plus;
    let j_minus_dot = -i * p.recoil_freq() * s.j_minus + i * lambda * (2.0 / n).sqrt() * field_x * s.j_z;
    let j_z_dot = (i * drive * field_x * (s.j_minus - j_plus)).re;

    SupermodeState { a_plus: a_plus_dot, a_minus: a_minus_dot, j_minus: j_minus_dot, j_z: j_z_dot, b: b_dot }
}

/// Two-cavity equations at fixed (params, λ), evaluated on the flat
/// (re, im) layout without forming complex numbers.
pub struct TwoCavitySystem {
    gamma: f64,
    detuning: f64,
    detuning_prime: f64,
    g: f64,
    recoil: f64,
    // λ/√N
    coupling: f64,
}

impl TwoCavitySystem {
    pub fn new(p: &DerivedParams, lambda: f64) -> Self {
        let raw = p.raw();
        TwoCavitySystem {
            gamma: raw.cavity_loss,
            detuning: raw.pump_cavity_detuning,
            detuning_prime: p.detuning_prime(),
            g: raw.cavity_coupling,
            recoil: p.recoil_freq(),
            coupling: lambda / raw.n_atoms.sqrt(),
        }
    }
}

impl OdeSystem<{ TwoCavityState::DIM }> for TwoCavitySystem {
    fn rhs(&self, _t: f64, y: &[f64; 7], dy: &mut [f64; 7]) {
        let [x1, y1, x2, y2, jr, ji, jz] = *y;
        let TwoCavitySystem { gamma, detuning, detuning_prime, g, recoil, coupling } = *self;
        dy[0] = -gamma * x1 - detuning * y1 + g * y2;
        dy[1] = -gamma * y1 + detuning * x1 - g * x2;
        dy[2] = -gamma * x2 - detuning_prime * y2 + g * y1;
        dy[3] = -gamma * y2 + detuning_prime * x2 - g * x1 - 2.0 * coupling * jr;
        dy[4] = recoil * ji;
        dy[5] = -recoil * jr + 4.0 * coupling * jz * x2;
        dy[6] = -4.0 * coupling * ji * x2;
    }
}

/// Supermode equations (with the mechanical mode) at fixed (params, λ).
pub struct SupermodeSystem {
    pub params: DerivedParams,
    pub lambda: f64,
}

impl OdeSystem<{ SupermodeState::DIM }> for SupermodeSystem {
    fn rhs(&self, _t: f64, y: &[f64; 9], dy: &mut [f64; 9]) {
        rhs_supermode(&SupermodeState::from_flat(y), &self.params, self.lambda).write_flat(dy);
    }
}

/// Which times to record.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampling {
    /// Only t = 0 and t_end.
    Endpoints,
    /// `n` evenly spaced samples from 0 to t_end inclusive.
    Uniform(usize),
    /// Explicit ascending sample times within [0, t_end].
    Times(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub sampling: Sampling,
    pub max_steps: u64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            sampling: Sampling::Endpoints,
            max_steps: StepperOptions::default().max_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub picture: Picture,
    pub times: Vec<f64>,
    pub states: Vec<SystemState>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn last(&self) -> &SystemState {
        self.states.last().expect("trajectory has at least one sample")
    }

    /// Write as CSV with header
    /// `t,re_a1,im_a1,re_a2,im_a2,re_Jm,im_Jm,Jz` and, in the supermode
    /// picture, `,re_b,im_b`. In the supermode picture the a1/a2 columns
    /// hold a₊ and a₋.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = String::from("t,re_a1,im_a1,re_a2,im_a2,re_Jm,im_Jm,Jz");
        if self.picture == Picture::Supermode {
            header.push_str(",re_b,im_b");
        }
        writeln!(w, "{header}")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut line = fmt_f64(*t);
            for v in s.to_flat() {
                line.push(',');
                line.push_str(&fmt_f64(v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

fn check_tolerances(rel_tol: f64, abs_tol: f64) -> Result<()> {
    if !(rel_tol > 0.0 && rel_tol <= 1e-2) || !(abs_tol > 0.0 && abs_tol <= 1e-2) {
        return Err(Error::domain(format!("tolerances must lie in (0, 1e-2], got rel {rel_tol}, abs {abs_tol}")));
    }
    Ok(())
}

/// Integrate from `s0` at t = 0 to `t_end`; the picture follows `s0`.
pub fn integrate(
    s0: &SystemState,
    p: &DerivedParams,
    lambda: f64,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::domain(format!("t_end must be > 0, got {t_end}")));
    }
    check_tolerances(opts.rel_tol, opts.abs_tol)?;
    let times = match &opts.sampling {
        Sampling::Endpoints => vec![0.0, t_end],
        Sampling::Uniform(n) if *n >= 2 => crate::numeric::spaced(0.0, t_end, *n, false),
        Sampling::Uniform(n) => return Err(Error::domain(format!("need at least 2 samples, got {n}"))),
        Sampling::Times(ts) => {
            if ts.windows(2).any(|w| w[1] <= w[0]) || ts.iter().any(|&t| !(0.0..=t_end).contains(&t)) {
                return Err(Error::domain("sample times must be strictly increasing within [0, t_end]"));
            }
            ts.clone()
        }
    };

    let stepper_opts = StepperOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        h_min: MIN_STEP,
        max_steps: opts.max_steps,
        ..StepperOptions::default()
    };
    let (states, stats) = match s0 {
        SystemState::TwoCavity(s) => {
            let sys = TwoCavitySystem::new(p, lambda);
            let mut y0 = [0.0; TwoCavityState::DIM];
            s.write_flat(&mut y0);
            let mut stepper = Dopri5::new(&sys, 0.0, &y0, stepper_opts)?;
            let flat = stepper.solve(t_end, &times)?;
            let states = flat.iter().map(|y| SystemState::TwoCavity(TwoCavityState::from_flat(y))).collect();
            (states, stepper.stats())
        }
        SystemState::Supermode(s) => {
            let sys = SupermodeSystem { params: *p, lambda };
            let mut y0 = [0.0; SupermodeState::DIM];
            s.write_flat(&mut y0);
            let mut stepper = Dopri5::new(&sys, 0.0, &y0, stepper_opts)?;
            let flat = stepper.solve(t_end, &times)?;
            let states = flat.iter().map(|y| SystemState::Supermode(SupermodeState::from_flat(y))).collect();
            (states, stepper.stats())
        }
    };
    Ok(Trajectory { picture: s0.picture(), times, states, stats })
}

/// Outcome of a successful relaxation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation {
    /// Final numeric state, classified with the analytic phase label.
    pub state: SteadyState,
    /// Analytic fixed point the run started from (before the kick).
    pub analytic: SteadyState,
    /// Time at which convergence was detected (s).
    pub t_converged: f64,
    /// ‖Δs‖/‖s‖ over the last detection window.
    pub window_change: f64,
    /// Largest relative error |numeric − analytic| / |analytic| over the
    /// amplitudes a1, a2, J₋ and J_z (zero analytic amplitudes are skipped).
    pub deviation: f64,
    /// Relative change of |J₋|² + J_z² from the kicked initial state.
    pub conservation_drift: f64,
    pub stats: StepStats,
}

/// Multiplicative kick (1 + ε) on the fields and J₋; J_z is then reset so
/// the spin stays on the |J|² = N²/4 sphere with its sign unchanged.
pub fn kick(s: &TwoCavityState, n_atoms: f64, eps: f64) -> TwoCavityState {
    let f = 1.0 + eps;
    let half = n_atoms / 2.0;
    let mut j_minus = s.j_minus * f;
    if j_minus.norm() > half {
        j_minus *= half / j_minus.norm();
    }
    let r = j_minus.norm();
    let j_z_mag = ((half - r) * (half + r)).max(0.0).sqrt();
    let sign = if s.j_z < 0.0 { -1.0 } else { 1.0 };
    TwoCavityState { a1: s.a1 * f, a2: s.a2 * f, j_minus, j_z: sign * j_z_mag }
}

fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest per-amplitude relative error of `s` against `reference`.
pub fn amplitude_deviation(s: &TwoCavityState, reference: &TwoCavityState) -> f64 {
    let pairs = [
        (s.a1, reference.a1),
        (s.a2, reference.a2),
        (s.j_minus, reference.j_minus),
        (Complex64::new(s.j_z, 0.0), Complex64::new(reference.j_z, 0.0)),
    ];
    pairs.iter().filter(|(_, r)| r.norm() > 0.0).map(|(x, r)| (x - r).norm() / r.norm()).fold(0.0, f64::max)
}

/// Relaxation detection window, in units of 1/γ.
pub const RELAX_WINDOW_GAMMA: f64 = 10.0;
/// Relative state change per window that counts as converged.
pub const RELAX_THRESHOLD: f64 = 1e-8;

/// Integrate the two-cavity equations from the analytic fixed point,
/// perturbed by `kick(…, perturbation)`, until the state changes by less
/// than 1e-8 (relative) over a window of 10/γ.
pub fn relax_to_steady(p: &DerivedParams, lambda: f64, perturbation: f64, t_max: f64) -> Result<Relaxation> {
    let lc = dicke::critical_coupling(p)?;
    if lambda == lc {
        return Err(Error::domain("relaxation is undefined exactly at the critical coupling"));
    }
    if !(t_max.is_finite() && t_max > 0.0) || !perturbation.is_finite() {
        return Err(Error::domain("t_max must be > 0 and the perturbation finite"));
    }
    let analytic = dicke::steady_state(p, lambda)?;
    let n = p.raw().n_atoms;
    let s0 = kick(&TwoCavityState::from_steady(&analytic), n, perturbation);
    let len0 = s0.spin_length_sq();

    let sys = TwoCavitySystem::new(p, lambda);
    let opts = StepperOptions { rel_tol: 1e-10, abs_tol: 1e-10, h_min: MIN_STEP, ..Default::default() };
    let mut y0 = [0.0; TwoCavityState::DIM];
    s0.write_flat(&mut y0);
    let mut stepper = Dopri5::new(&sys, 0.0, &y0, opts)?;

    let window = RELAX_WINDOW_GAMMA / p.raw().cavity_loss;
    let mut prev = y0;
    let mut t_next = window;
    let change = loop {
        let t_stop = t_next.min(t_max);
        stepper.advance_to(t_stop)?;
        let y = stepper.y();
        let diff: Vec<f64> = y.iter().zip(&prev).map(|(a, b)| a - b).collect();
        let change = norm(&diff) / norm(y).max(f64::MIN_POSITIVE);
        if change < RELAX_THRESHOLD {
            break change;
        }
        if t_stop >= t_max {
            return Err(Error::NoConvergence { t: t_stop, residual: change });
        }
        prev.copy_from_slice(y);
        t_next += window;
    };

    let fin = TwoCavityState::from_flat(stepper.y());
    let deviation = amplitude_deviation(&fin, &TwoCavityState::from_steady(&analytic));

    let state = SteadyState {
        a1: fin.a1,
        a2: fin.a2,
        j_minus: fin.j_minus,
        j_z: fin.j_z,
        photons_cavity2: fin.a2.norm_sqr(),
        phase: if lambda < lc { Phase::Normal } else { Phase::Superradiant },
    };
    Ok(Relaxation {
        state,
        analytic,
        t_converged: stepper.t(),
        window_change: change,
        deviation,
        conservation_drift: ((fin.spin_length_sq() - len0) / len0).abs(),
        stats: stepper.stats(),
    })
}

/// Result of [`decay_fields`].
#[derive(Debug, Clone, PartialEq)]
pub struct Decay {
    /// First time after which the field ratio stayed below the target (s).
    pub t_decayed: f64,
    /// max(|a1|, |a2|) at the end, relative to the initial max(|a1|, |a2|).
    pub final_ratio: f64,
    pub final_state: TwoCavityState,
    pub stats: StepStats,
}

/// Integrate from `s0` until both cavity fields have dropped below
/// `ratio` times their initial magnitude and stayed there for
/// `hold` seconds. Intended for the normal phase, where the vacuum is
/// an attractor.
pub fn decay_fields(
    p: &DerivedParams,
    lambda: f64,
    s0: &TwoCavityState,
    ratio: f64,
    hold: f64,
    t_max: f64,
) -> Result<Decay> {
    let scale = s0.a1.norm().max(s0.a2.norm());
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain("initial fields must be finite and not both zero"));
    }
    if !(ratio > 0.0 && ratio < 1.0) || !(hold >= 0.0) || !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::domain("need 0 < ratio < 1, hold >= 0 and finite t_max > 0"));
    }
    let sys = TwoCavitySystem::new(p, lambda);
    // Absolute tolerance well under the target so the tail is resolved.
    let opts = StepperOptions { rel_tol: 1e-8, abs_tol: 1e-6 * ratio * scale, h_min: MIN_STEP, ..Default::default() };
    let mut y0 = [0.0; TwoCavityState::DIM];
    s0.write_flat(&mut y0);
    let mut stepper = Dopri5::new(&sys, 0.0, &y0, opts)?;
    let target_sq = ratio * ratio * scale * scale;
    let field_sq = |y: &[f64; TwoCavityState::DIM]| (y[0] * y[0] + y[1] * y[1]).max(y[2] * y[2] + y[3] * y[3]);

    let mut below_since: Option<f64> = None;
    loop {
        stepper.step(t_max)?;
        let r_sq = field_sq(stepper.y());
        let t = stepper.t();
        if r_sq < target_sq {
            let since = *below_since.get_or_insert(t);
            if t - since >= hold {
                return Ok(Decay {
                    t_decayed: since,
                    final_ratio: r_sq.sqrt() / scale,
                    final_state: TwoCavityState::from_flat(stepper.y()),
                    stats: stepper.stats(),
                });
            }
        } else {
            below_since = None;
        }
        if t >= t_max {
            return Err(Error::NoConvergence { t, residual: r_sq.sqrt() / scale });
        }
    }
}
