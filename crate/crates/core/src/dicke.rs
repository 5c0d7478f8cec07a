//! Superradiant phase transition of the pumped condensate.
//!
//! Closed-form fixed points of the mean-field equations for the two
//! optical modes and the collective momentum spin (J₋, J_z).

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::minimize_scalar;
use crate::params::DerivedParams;

/// Relative size of γv − Δc·u below which the critical coupling is
/// reported as divergent.
const SINGULAR_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Normal,
    Superradiant,
    Critical,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Normal => "normal",
            Phase::Superradiant => "superradiant",
            Phase::Critical => "critical",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Analytic fixed point at a given pump coupling λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub a1: Complex64,
    pub a2: Complex64,
    pub j_minus: Complex64,
    pub j_z: f64,
    /// |a2|².
    pub photons_cavity2: f64,
    pub phase: Phase,
}

/// Critical coupling λ_c = ½·√(ω_r(u² + v²)/|γv − Δc·u|).
pub fn critical_coupling(p: &DerivedParams) -> Result<f64> {
    let gamma = p.raw().cavity_loss;
    let dc = p.raw().pump_cavity_detuning;
    let (u, v) = (p.u_coef(), p.v_coef());
    let denom = p.critical_denominator();
    let scale = (gamma * v).abs() + (dc * u).abs();
    if denom == 0.0 || denom.abs() <= SINGULAR_REL_TOL * scale {
        return Err(Error::Singular { detuning: dc, denominator: denom });
    }
    let lc = 0.5 * (p.recoil_freq() * (u * u + v * v) / denom.abs()).sqrt();
    if !lc.is_finite() {
        return Err(Error::Singular { detuning: dc, denominator: denom });
    }
    Ok(lc)
}

/// The analytic steady state at coupling `lambda`.
///
/// Below λ_c every optical amplitude and J₋ vanish and the spin points
/// along J_z = sign(γv − Δc·u)·N/2, which is the λ → λ_c⁺ limit of the
/// superradiant branch. Above λ_c, J₋ is taken real and positive.
pub fn steady_state(p: &DerivedParams, lambda: f64) -> Result<SteadyState> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::domain(format!("coupling must be finite and >= 0, got {lambda}")));
    }
    let lc = critical_coupling(p)?;
    let raw = p.raw();
    let n = raw.n_atoms;
    let denom = p.critical_denominator();

    if lambda <= lc {
        return Ok(SteadyState {
            a1: Complex64::new(0.0, 0.0),
            a2: Complex64::new(0.0, 0.0),
            j_minus: Complex64::new(0.0, 0.0),
            j_z: denom.signum() * n / 2.0,
            photons_cavity2: 0.0,
            phase: if lambda == lc { Phase::Critical } else { Phase::Normal },
        });
    }

    let gamma = raw.cavity_loss;
    let dc = raw.pump_cavity_detuning;
    let g = raw.cavity_coupling;
    let (u, v) = (p.u_coef(), p.v_coef());

    let j_z = n * p.recoil_freq() * (u * u + v * v) / (8.0 * lambda * lambda * denom);
    let half = n / 2.0;
    // (N/2 − |J_z|)(N/2 + |J_z|) keeps precision close to the transition
    let j_minus = Complex64::new(((half - j_z.abs()) * (half + j_z.abs())).max(0.0).sqrt(), 0.0);
    let a2 = -2.0 * lambda * Complex64::new(dc, gamma) * j_minus / (n.sqrt() * Complex64::new(u, -v));
    let a1 = -Complex64::i() * g * a2 / Complex64::new(gamma, -dc);

    Ok(SteadyState { a1, a2, j_minus, j_z, photons_cavity2: a2.norm_sqr(), phase: Phase::Superradiant })
}

/// Steady-state photon number of the atomic cavity,
/// Nλ²(Δc² + γ²)/(u² + v²)·(1 − λ_c⁴/λ⁴), zero at and below λ_c.
pub fn intracavity_photons(p: &DerivedParams, lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::domain(format!("coupling must be finite and >= 0, got {lambda}")));
    }
    let lc = critical_coupling(p)?;
    if lambda <= lc {
        return Ok(0.0);
    }
    let raw = p.raw();
    let (u, v) = (p.u_coef(), p.v_coef());
    let dc = raw.pump_cavity_detuning;
    let gamma = raw.cavity_loss;
    let ratio = (lc / lambda).powi(4);
    Ok(raw.n_atoms * lambda * lambda * (dc * dc + gamma * gamma) / (u * u + v * v) * (1.0 - ratio))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalMinimum {
    /// Minimizing detuning Δc* (rad/s).
    pub detuning: f64,
    /// λ_c at Δc* (rad/s).
    pub lambda_c: f64,
}

/// λ_c as a function of detuning, with every other parameter from `p`.
pub fn critical_coupling_at(p: &DerivedParams, detuning: f64) -> Result<f64> {
    critical_coupling(&p.with_detuning(detuning)?)
}

/// Detuning in `[lo, hi]` that minimizes the critical coupling.
///
/// Grid scan of `grid` points followed by golden-section refinement.
/// Singular detunings are skipped.
pub fn minimize_critical_coupling(p: &DerivedParams, lo: f64, hi: f64, grid: usize) -> Result<CriticalMinimum> {
    let m =
        minimize_scalar(|dc| critical_coupling_at(p, dc).unwrap_or(f64::INFINITY), lo, hi, grid).map_err(
            |e| match e {
                Error::NoMinimum(_) => {
                    Error::NoMinimum(format!("critical coupling is singular everywhere on [{lo:e}, {hi:e}] rad/s"))
                }
                other => other,
            },
        )?;
    Ok(CriticalMinimum { detuning: m.x, lambda_c: m.value })
}
