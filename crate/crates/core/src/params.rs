//! Physical inputs and the quantities derived from them.
//!
//! All frequencies and rates are angular, in rad/s. Inputs quoted in the
//! literature as "2π × f" are converted on ingestion (see [`crate::config`]).

use std::f64::consts::TAU;

use serde::Serialize;

use crate::constants::{HBAR, RB87_D2_DIPOLE, RB87_MASS};
use crate::error::{Error, Result};

/// Raw experimental inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RawParams {
    /// Number of atoms N.
    pub n_atoms: f64,
    /// Pump wavelength λ_p (m).
    pub pump_wavelength: f64,
    /// Optical loss rate γ of each cavity (rad/s).
    pub cavity_loss: f64,
    /// Mechanical frequency ω_m (rad/s).
    pub mech_freq: f64,
    /// Mechanical damping γ_m (1/s).
    pub mech_damping: f64,
    /// Single-atom atom-photon coupling g0 (rad/s).
    pub atom_photon_g0: f64,
    /// Collective light shift N·U0 (rad/s), usually negative.
    pub collective_stark_nu0: f64,
    /// Optomechanical coupling χ (1/s).
    pub com_coupling: f64,
    /// Inter-cavity tunnelling g (rad/s).
    pub cavity_coupling: f64,
    /// Pump-cavity detuning Δc = ω_p − ω_c (rad/s).
    pub pump_cavity_detuning: f64,
    /// Atomic mass (kg).
    pub atom_mass: f64,
    /// Transition dipole matrix element (C·m).
    pub dipole_moment: f64,
    /// Pump beam waist w_c (m).
    pub beam_waist: f64,
}

impl RawParams {
    /// The two-cavity parameter set used for the gain and phonon-number
    /// curves: ⁸⁷Rb, 784.3 nm pump, Δc = ω_m/2 and 2g = ω_m.
    pub fn paper_preset() -> Self {
        RawParams {
            n_atoms: 1e5,
            pump_wavelength: 784.3e-9,
            cavity_loss: TAU * 1e6,
            mech_freq: TAU * 20e6,
            mech_damping: 100.0,
            atom_photon_g0: TAU * 14e6,
            collective_stark_nu0: -TAU * 2e6,
            com_coupling: 300.0,
            cavity_coupling: TAU * 10e6,
            pump_cavity_detuning: TAU * 10e6,
            atom_mass: RB87_MASS,
            dipole_moment: RB87_D2_DIPOLE,
            beam_waist: 25e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_atoms", self.n_atoms),
            ("pump_wavelength", self.pump_wavelength),
            ("cavity_loss", self.cavity_loss),
            ("mech_freq", self.mech_freq),
            ("mech_damping", self.mech_damping),
            ("atom_photon_g0", self.atom_photon_g0),
            ("atom_mass", self.atom_mass),
            ("beam_waist", self.beam_waist),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::domain(format!("{name} must be finite and > 0, got {value}")));
            }
        }
        if self.n_atoms < 1.0 {
            return Err(Error::domain(format!("n_atoms must be >= 1, got {}", self.n_atoms)));
        }
        if !(self.com_coupling.is_finite() && self.com_coupling >= 0.0) {
            return Err(Error::domain(format!("com_coupling must be finite and >= 0, got {}", self.com_coupling)));
        }
        let finite = [
            ("collective_stark_nu0", self.collective_stark_nu0),
            ("cavity_coupling", self.cavity_coupling),
            ("pump_cavity_detuning", self.pump_cavity_detuning),
            ("dipole_moment", self.dipole_moment),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(Error::domain(format!("{name} must be finite, got {value}")));
            }
        }
        Ok(())
    }

    pub fn derive(self) -> Result<DerivedParams> {
        derive(self)
    }
}

/// Supermode frequencies ω± = −Δc ± g + NU0/4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupermodeFreqs {
    pub plus: f64,
    pub minus: f64,
}

/// Raw inputs plus every quantity computed from them.
///
/// Construct with [`derive`]; the fields are read-only so a value can never
/// drift out of sync with its raw inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    raw: RawParams,
    wavevector: f64,
    recoil_freq: f64,
    u0: f64,
    detuning_prime: f64,
    supermode_freqs: SupermodeFreqs,
    u_coef: f64,
    v_coef: f64,
}

impl DerivedParams {
    pub fn raw(&self) -> &RawParams {
        &self.raw
    }

    /// k = 2π/λ_p (1/m).
    pub fn wavevector(&self) -> f64 {
        self.wavevector
    }

    /// ω_r = ħk²/2m (rad/s).
    pub fn recoil_freq(&self) -> f64 {
        self.recoil_freq
    }

    /// U0 = NU0/N (rad/s).
    pub fn u0(&self) -> f64 {
        self.u0
    }

    /// Δ′c = Δc − NU0/2 (rad/s).
    pub fn detuning_prime(&self) -> f64 {
        self.detuning_prime
    }

    pub fn supermode_freqs(&self) -> SupermodeFreqs {
        self.supermode_freqs
    }

    /// u = g² + γ² − ΔcΔ′c.
    pub fn u_coef(&self) -> f64 {
        self.u_coef
    }

    /// v = γ(Δc + Δ′c).
    pub fn v_coef(&self) -> f64 {
        self.v_coef
    }

    /// γv − Δc·u; the critical coupling diverges where this vanishes.
    pub fn critical_denominator(&self) -> f64 {
        self.raw.cavity_loss * self.v_coef - self.raw.pump_cavity_detuning * self.u_coef
    }

    /// Same parameters at a different pump-cavity detuning.
    pub fn with_detuning(&self, detuning: f64) -> Result<DerivedParams> {
        derive(RawParams { pump_cavity_detuning: detuning, ..self.raw })
    }

    pub fn with_raw(&self, f: impl FnOnce(&mut RawParams)) -> Result<DerivedParams> {
        let mut raw = self.raw;
        f(&mut raw);
        derive(raw)
    }
}

/// Recoil frequency ħk²/2m for a photon of the given wavelength.
pub fn recoil_frequency(wavelength: f64, mass: f64) -> Result<f64> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::domain(format!("wavelength must be > 0, got {wavelength}")));
    }
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::domain(format!("mass must be > 0, got {mass}")));
    }
    let k = TAU / wavelength;
    Ok(HBAR * k * k / (2.0 * mass))
}

pub fn derive(raw: RawParams) -> Result<DerivedParams> {
    raw.validate()?;
    let wavevector = TAU / raw.pump_wavelength;
    let recoil_freq = recoil_frequency(raw.pump_wavelength, raw.atom_mass)?;

    let gamma = raw.cavity_loss;
    let g = raw.cavity_coupling;
    let dc = raw.pump_cavity_detuning;
    let nu0 = raw.collective_stark_nu0;

    let detuning_prime = dc - nu0 / 2.0;
    let u_coef = g * g + gamma * gamma - dc * detuning_prime;
    let v_coef = gamma * (dc + detuning_prime);

    Ok(DerivedParams {
        raw,
        wavevector,
        recoil_freq,
        u0: nu0 / raw.n_atoms,
        detuning_prime,
        supermode_freqs: SupermodeFreqs { plus: -dc + g + nu0 / 4.0, minus: -dc - g + nu0 / 4.0 },
        u_coef,
        v_coef,
    })
}
