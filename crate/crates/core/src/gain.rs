//! Mechanical gain of the membrane mode driven by the superradiant field.
//!
//! With the optical supermodes and the collective spin adiabatically
//! eliminated, the phonon amplitude obeys
//! ḃ = (−iω_m + iω′ + G − γ_m)b + C, where G = G0 + G1. Near threshold the
//! phonon population is negligible, so α is evaluated at b = 0, n_b = 0.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::dicke::{critical_coupling, intracavity_photons, steady_state};
use crate::error::{Error, Result};
use crate::numeric::bisect_secant;
use crate::params::DerivedParams;

/// Relative tolerance of the threshold root.
pub const THRESHOLD_REL_TOL: f64 = 1e-10;
/// Sub-intervals scanned to locate the first sign change of G − γ_m.
const THRESHOLD_SCAN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainBreakdown {
    /// Supermode population inversion δn.
    pub delta_n: f64,
    /// G0 (1/s), proportional to δn.
    pub g0_term: f64,
    /// G1 (1/s), vanishes at 2g = ω_m.
    pub g1_term: f64,
    /// G = G0 + G1 (1/s).
    pub gain: f64,
    /// Frequency pull ω′ (rad/s).
    pub freq_pull: f64,
    /// Constant drive C of the phonon equation (1/s).
    #[serde(serialize_with = "serialize_complex")]
    pub drive_c: Complex64,
    pub alpha: f64,
    pub beta: f64,
    /// Stimulated phonon number exp(2(G − γ_m)/γ_m).
    pub n_b: f64,
    /// `n_b` overflowed to +∞.
    pub n_b_saturated: bool,
}

fn serialize_complex<S: serde::Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Complex", 2)?;
    st.serialize_field("re", &c.re)?;
    st.serialize_field("im", &c.im)?;
    st.end()
}

/// α and β of the eliminated supermode amplitudes:
/// α = γ² + g² − Δc² + (NU0/4)(2Δc + χ Re b) + (χ²/4) n_b, β = γ(Δc + Δ′c).
pub fn alpha_beta(p: &DerivedParams, b: Complex64, n_b: f64) -> Result<(f64, f64)> {
    if !(n_b >= 0.0) {
        return Err(Error::domain(format!("phonon number must be >= 0, got {n_b}")));
    }
    let raw = p.raw();
    let (gamma, g, dc, chi) = (raw.cavity_loss, raw.cavity_coupling, raw.pump_cavity_detuning, raw.com_coupling);
    let alpha = gamma * gamma + g * g - dc * dc
        + raw.collective_stark_nu0 / 4.0 * (2.0 * dc + chi * b.re)
        + chi * chi / 4.0 * n_b;
    let beta = gamma * (dc + p.detuning_prime());
    Ok((alpha, beta))
}

/// δn ≈ 2gΔc/(Δc² + γ²)·|a_{2,s}|², zero at and below λ_c.
pub fn population_inversion(p: &DerivedParams, lambda: f64) -> Result<f64> {
    let photons = intracavity_photons(p, lambda)?;
    if photons == 0.0 {
        return Ok(0.0);
    }
    let raw = p.raw();
    let dc = raw.pump_cavity_detuning;
    let gamma = raw.cavity_loss;
    Ok(2.0 * raw.cavity_coupling * dc / (dc * dc + gamma * gamma) * photons)
}

/// N_b = exp(2(G − γ_m)/γ_m). Overflows to +∞ for very large gain.
pub fn phonon_number(gain: f64, gamma_m: f64) -> f64 {
    (2.0 * (gain - gamma_m) / gamma_m).exp()
}

pub fn mechanical_gain(p: &DerivedParams, lambda: f64) -> Result<GainBreakdown> {
    let raw = p.raw();
    let ss = steady_state(p, lambda)?;
    let delta_n = population_inversion(p, lambda)?;
    let j_sq = ss.j_minus.norm_sqr();
    let (alpha, beta) = alpha_beta(p, Complex64::new(0.0, 0.0), 0.0)?;

    let gamma = raw.cavity_loss;
    let chi = raw.com_coupling;
    let n = raw.n_atoms;
    let g = raw.cavity_coupling;
    let detune = 2.0 * g - raw.mech_freq;
    let lorentz = detune * detune + 4.0 * gamma * gamma;

    // λ²J₋²/(N(α² + β²)); zero whenever the spin is unpolarized
    let spin_term = if j_sq == 0.0 {
        0.0
    } else {
        let ab = alpha * alpha + beta * beta;
        if ab == 0.0 {
            return Err(Error::domain("alpha and beta vanish together; gain is undefined"));
        }
        lambda * lambda * j_sq / (n * ab)
    };

    let g0_term = chi * chi * gamma * delta_n / (2.0 * detune * detune + 8.0 * gamma * gamma);
    // Adding +0 turns the −0 produced at 2g = ω_m into +0.
    let g1_term = -chi * chi * spin_term * beta * detune / lorentz + 0.0;
    let gain = g0_term + g1_term;

    let freq_pull = chi * chi / lorentz * (-detune * delta_n / 4.0 - 2.0 * gamma * spin_term * beta);

    // 2χλ²J₋²/(2γ + i(2g − ω_m))·[NU0 δn/(16λ²J₋²) − (gα + i(αγ + βΔc))/(N(α² + β²))],
    // expanded so the first term stays finite when J₋ = 0.
    let lorentz_c = Complex64::new(2.0 * gamma, detune);
    let dc = raw.pump_cavity_detuning;
    let drive_c = chi * raw.collective_stark_nu0 * delta_n / (8.0 * lorentz_c)
        - 2.0 * chi * spin_term * Complex64::new(g * alpha, alpha * gamma + beta * dc) / lorentz_c;

    let n_b = phonon_number(gain, raw.mech_damping);
    Ok(GainBreakdown {
        delta_n,
        g0_term,
        g1_term,
        gain,
        freq_pull,
        drive_c,
        alpha,
        beta,
        n_b,
        n_b_saturated: n_b.is_infinite(),
    })
}

/// Default threshold search bracket [1.001 λ_c, 20 λ_c].
pub fn default_threshold_bracket(p: &DerivedParams) -> Result<(f64, f64)> {
    let lc = critical_coupling(p)?;
    Ok((1.001 * lc, 20.0 * lc))
}

/// Smallest λ in `bracket` with G(λ) = γ_m, refined to relative 1e-10.
///
/// `None` uses [`default_threshold_bracket`].
pub fn threshold_coupling(p: &DerivedParams, bracket: Option<(f64, f64)>) -> Result<f64> {
    let (lo, hi) = match bracket {
        Some(b) => b,
        None => default_threshold_bracket(p)?,
    };
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
        return Err(Error::domain(format!("invalid bracket [{lo}, {hi}]")));
    }
    let gamma_m = p.raw().mech_damping;
    let excess = |lambda: f64| -> Result<f64> { Ok(mechanical_gain(p, lambda)?.gain - gamma_m) };

    let f_lo = excess(lo)?;
    let f_hi = excess(hi)?;
    let mut a = lo;
    let mut fa = f_lo;
    for i in 1..=THRESHOLD_SCAN {
        let b = if i == THRESHOLD_SCAN { hi } else { lo + (hi - lo) * i as f64 / THRESHOLD_SCAN as f64 };
        let fb = if i == THRESHOLD_SCAN { f_hi } else { excess(b)? };
        if fa == 0.0 {
            return Ok(a);
        }
        if fa.signum() != fb.signum() || fb == 0.0 {
            return bisect_secant(|x| excess(x).unwrap_or(f64::NAN), a, b, THRESHOLD_REL_TOL);
        }
        a = b;
        fa = fb;
    }
    Err(Error::Bracket { lo, hi, f_lo, f_hi })
}

/// Pump power P = πħ²ε0 c w_c² g0² λ²/(2N𝒟²U0²) that yields coupling λ.
pub fn pump_power(lambda: f64, p: &DerivedParams) -> Result<f64> {
    let raw = p.raw();
    if !(raw.dipole_moment > 0.0) {
        return Err(Error::domain(format!("dipole moment must be > 0, got {}", raw.dipole_moment)));
    }
    if p.u0() == 0.0 {
        return Err(Error::domain("U0 = 0: pump power is undefined"));
    }
    if !lambda.is_finite() {
        return Err(Error::domain(format!("coupling must be finite, got {lambda}")));
    }
    let w = raw.beam_waist;
    let d = raw.dipole_moment;
    let u0 = p.u0();
    Ok(PI
        * HBAR
        * HBAR
        * EPSILON_0
        * SPEED_OF_LIGHT
        * w
        * w
        * raw.atom_photon_g0
        * raw.atom_photon_g0
        * lambda
        * lambda
        / (2.0 * raw.n_atoms * d * d * u0 * u0))
}
