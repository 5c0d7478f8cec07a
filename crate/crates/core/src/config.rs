//! Sectioned `key = value` parameter files.
//!
//! ```text
//! [cavity]
//! cavity_loss_two_pi_hz = 1e6      # stored as 2π × 1e6 rad/s
//! ```
//!
//! Each key is a parameter name followed by a unit suffix. Comments start
//! with `#` or `;`. Every parameter except the atomic mass and dipole moment
//! (⁸⁷Rb defaults) must be present exactly once, in its own section.

use std::f64::consts::TAU;
use std::path::Path;

use crate::constants::{RB87_D2_DIPOLE, RB87_MASS};
use crate::error::{Error, Result};
use crate::params::RawParams;

/// The bundled parameter file reproducing the published two-cavity setup.
pub const PAPER_CFG: &str = include_str!("../presets/paper.cfg");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    NAtoms,
    AtomMass,
    DipoleMoment,
    PumpWavelength,
    BeamWaist,
    AtomPhotonG0,
    PumpCavityDetuning,
    CavityLoss,
    CavityCoupling,
    CollectiveStarkNu0,
    MechFreq,
    MechDamping,
    ComCoupling,
}

const FREQ_UNITS: &[(&str, f64)] = &[("rad_per_s", 1.0), ("two_pi_hz", TAU), ("per_s", 1.0)];
const LENGTH_UNITS: &[(&str, f64)] = &[("m", 1.0), ("um", 1e-6), ("nm", 1e-9)];

struct FieldSpec {
    field: Field,
    section: &'static str,
    name: &'static str,
    units: &'static [(&'static str, f64)],
    required: bool,
}

const FIELDS: &[FieldSpec] = &[
    FieldSpec { field: Field::NAtoms, section: "atoms", name: "n_atoms", units: &[("count", 1.0)], required: true },
    FieldSpec { field: Field::AtomMass, section: "atoms", name: "atom_mass", units: &[("kg", 1.0)], required: false },
    FieldSpec {
        field: Field::DipoleMoment,
        section: "atoms",
        name: "dipole_moment",
        units: &[("c_m", 1.0)],
        required: false,
    },
    FieldSpec {
        field: Field::PumpWavelength,
        section: "pump",
        name: "pump_wavelength",
        units: LENGTH_UNITS,
        required: true,
    },
    FieldSpec { field: Field::BeamWaist, section: "pump", name: "beam_waist", units: LENGTH_UNITS, required: true },
    FieldSpec {
        field: Field::AtomPhotonG0,
        section: "pump",
        name: "atom_photon_g0",
        units: FREQ_UNITS,
        required: true,
    },
    FieldSpec {
        field: Field::PumpCavityDetuning,
        section: "pump",
        name: "pump_cavity_detuning",
        units: FREQ_UNITS,
        required: true,
    },
    FieldSpec { field: Field::CavityLoss, section: "cavity", name: "cavity_loss", units: FREQ_UNITS, required: true },
    FieldSpec {
        field: Field::CavityCoupling,
        section: "cavity",
        name: "cavity_coupling",
        units: FREQ_UNITS,
        required: true,
    },
    FieldSpec {
        field: Field::CollectiveStarkNu0,
        section: "cavity",
        name: "collective_stark_nu0",
        units: FREQ_UNITS,
        required: true,
    },
    FieldSpec { field: Field::MechFreq, section: "mechanics", name: "mech_freq", units: FREQ_UNITS, required: true },
    FieldSpec {
        field: Field::MechDamping,
        section: "mechanics",
        name: "mech_damping",
        units: FREQ_UNITS,
        required: true,
    },
    FieldSpec {
        field: Field::ComCoupling,
        section: "mechanics",
        name: "com_coupling",
        units: FREQ_UNITS,
        required: true,
    },
];

/// Split `key` into its field and unit scale, e.g. `cavity_loss_two_pi_hz`.
fn lookup(key: &str) -> Option<(&'static FieldSpec, f64)> {
    FIELDS.iter().find_map(|spec| {
        let rest = key.strip_prefix(spec.name)?.strip_prefix('_')?;
        spec.units.iter().find(|(unit, _)| *unit == rest).map(|&(_, scale)| (spec, scale))
    })
}

pub fn parse_config(text: &str) -> Result<RawParams> {
    let mut values: Vec<(Field, f64, usize)> = Vec::new();
    let mut section: Option<String> = None;
    let mut last_line = 0;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = match raw_line.find(['#', ';']) {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::config(line_no, None, "unterminated section header"))?
                .trim();
            if !FIELDS.iter().any(|f| f.section == name) {
                return Err(Error::config(line_no, None, format!("unknown section [{name}]")));
            }
            section = Some(name.to_owned());
            continue;
        }

        let (key, value) =
            line.split_once('=').ok_or_else(|| Error::config(line_no, None, "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();

        let (spec, scale) =
            lookup(key).ok_or_else(|| Error::config(line_no, Some(key), "unknown key or missing unit suffix"))?;
        match section.as_deref() {
            Some(s) if s == spec.section => {}
            Some(s) => {
                return Err(Error::config(line_no, Some(key), format!("belongs in [{}], found in [{s}]", spec.section)))
            }
            None => {
                return Err(Error::config(
                    line_no,
                    Some(key),
                    format!("key outside any section (expected [{}])", spec.section),
                ))
            }
        }
        if let Some(&(_, _, first)) = values.iter().find(|(f, _, _)| *f == spec.field) {
            return Err(Error::config(line_no, Some(key), format!("duplicate parameter, first set on line {first}")));
        }
        let number: f64 =
            value.parse().map_err(|_| Error::config(line_no, Some(key), format!("`{value}` is not a number")))?;
        if !number.is_finite() {
            return Err(Error::config(line_no, Some(key), "value must be finite"));
        }
        values.push((spec.field, number * scale, line_no));
    }

    let get = |field: Field| values.iter().find(|(f, _, _)| *f == field).map(|&(_, v, _)| v);
    for spec in FIELDS.iter().filter(|s| s.required) {
        if get(spec.field).is_none() {
            return Err(Error::config(
                last_line,
                Some(spec.name),
                format!(
                    "missing required parameter in [{}] (e.g. `{}_{} = ...`)",
                    spec.section, spec.name, spec.units[0].0
                ),
            ));
        }
    }
    let required = |field: Field| get(field).unwrap_or(f64::NAN);

    let raw = RawParams {
        n_atoms: required(Field::NAtoms),
        pump_wavelength: required(Field::PumpWavelength),
        cavity_loss: required(Field::CavityLoss),
        mech_freq: required(Field::MechFreq),
        mech_damping: required(Field::MechDamping),
        atom_photon_g0: required(Field::AtomPhotonG0),
        collective_stark_nu0: required(Field::CollectiveStarkNu0),
        com_coupling: required(Field::ComCoupling),
        cavity_coupling: required(Field::CavityCoupling),
        pump_cavity_detuning: required(Field::PumpCavityDetuning),
        atom_mass: get(Field::AtomMass).unwrap_or(RB87_MASS),
        dipole_moment: get(Field::DipoleMoment).unwrap_or(RB87_D2_DIPOLE),
        beam_waist: required(Field::BeamWaist),
    };
    raw.validate()?;
    Ok(raw)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RawParams> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(0, None, format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn paper_config() -> RawParams {
    parse_config(PAPER_CFG).expect("bundled preset parses")
}
