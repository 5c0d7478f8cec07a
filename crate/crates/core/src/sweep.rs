//! Parameter sweeps over (λ, Δc), figure presets, threshold reports and the
//! dynamics cross-check used by the command-line front end.

use std::fmt::Write as _;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dicke::{self, Phase};
use crate::dynamics::{decay_fields, relax_to_steady, TwoCavityState};
use crate::error::{Error, Result};
use crate::format::fmt_f64;
use crate::gain;
use crate::numeric::spaced;
use crate::params::DerivedParams;

/// Environment variable capping the sweep worker count (0 or unset = auto).
pub const THREADS_ENV: &str = "SUPERLASE_THREADS";

pub const CSV_HEADER: &str = "lambda_rad_per_s,detuning_rad_per_s,lambda_c_rad_per_s,phase,photons2,\
delta_n,G0_per_s,G1_per_s,G_per_s,N_b,P_watt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// `points` samples of `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Range {
    pub fn linear(min: f64, max: f64, points: usize) -> Self {
        Range { min, max, points, spacing: Spacing::Linear }
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::Spec(format!("{what} range must be finite")));
        }
        if !(self.min < self.max) {
            return Err(Error::Spec(format!("{what} range needs min < max, got [{}, {}]", self.min, self.max)));
        }
        if self.points < 2 {
            return Err(Error::Spec(format!("{what} range needs at least 2 points, got {}", self.points)));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(Error::Spec(format!("log spacing of {what} needs min > 0, got {}", self.min)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        spaced(self.min, self.max, self.points, self.spacing == Spacing::Log)
    }
}

/// One sweep axis: held fixed or sampled over a range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    Fixed(f64),
    Swept(Range),
}

impl Axis {
    fn values(&self, what: &str) -> Result<Vec<f64>> {
        match self {
            Axis::Fixed(x) if x.is_finite() => Ok(vec![*x]),
            Axis::Fixed(x) => Err(Error::Spec(format!("{what} must be finite, got {x}"))),
            Axis::Swept(r) => {
                r.validate(what)?;
                Ok(r.values())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub lambda: Axis,
    pub detuning: Axis,
}

impl SweepSpec {
    /// Grid points in output order: detuning outer, λ inner, both ascending.
    pub fn grid(&self) -> Result<Vec<(f64, f64)>> {
        let lambdas = self.lambda.values("lambda")?;
        let detunings = self.detuning.values("detuning")?;
        if lambdas.iter().any(|&l| l < 0.0) {
            return Err(Error::Spec("lambda must be >= 0".into()));
        }
        Ok(detunings.iter().flat_map(|&d| lambdas.iter().map(move |&l| (l, d))).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Mechanical gain against λ.
    Fig2,
    /// Stimulated phonon number against λ.
    Fig3,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
        }
    }

    /// λ from 0 to 10⁷ rad/s in 500 points at Δc = ω_m/2. Both presets
    /// share the grid; they differ only in which column is plotted.
    pub fn spec(self, p: &DerivedParams) -> SweepSpec {
        SweepSpec { lambda: Axis::Swept(Range::linear(0.0, 10e6, 500)), detuning: Axis::Fixed(0.5 * p.raw().mech_freq) }
    }
}

/// Label used for rows where the pipeline is singular.
pub const SINGULAR_LABEL: &str = "nan";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "lambda_rad_per_s")]
    pub lambda: f64,
    #[serde(rename = "detuning_rad_per_s")]
    pub detuning: f64,
    #[serde(rename = "lambda_c_rad_per_s")]
    pub lambda_c: f64,
    /// `normal`, `superradiant`, `critical`, or `nan` for singular points.
    pub phase: String,
    #[serde(rename = "photons2")]
    pub photons_cavity2: f64,
    pub delta_n: f64,
    #[serde(rename = "G0_per_s")]
    pub g0: f64,
    #[serde(rename = "G1_per_s")]
    pub g1: f64,
    #[serde(rename = "G_per_s")]
    pub gain: f64,
    #[serde(rename = "N_b")]
    pub n_b: f64,
    #[serde(rename = "P_watt")]
    pub power: f64,
}

impl SweepRow {
    fn singular(lambda: f64, detuning: f64) -> Self {
        SweepRow {
            lambda,
            detuning,
            lambda_c: f64::NAN,
            phase: SINGULAR_LABEL.into(),
            photons_cavity2: f64::NAN,
            delta_n: f64::NAN,
            g0: f64::NAN,
            g1: f64::NAN,
            gain: f64::NAN,
            n_b: f64::NAN,
            power: f64::NAN,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.phase == SINGULAR_LABEL
    }

    pub fn csv_line(&self) -> String {
        let mut s = String::new();
        for (i, x) in [self.lambda, self.detuning, self.lambda_c].iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&fmt_f64(*x));
        }
        let _ = write!(s, ",{}", self.phase);
        for x in [self.photons_cavity2, self.delta_n, self.g0, self.g1, self.gain, self.n_b, self.power] {
            s.push(',');
            s.push_str(&fmt_f64(x));
        }
        s
    }
}

/// Evaluate params → dicke → gain at one grid point. Any numerical failure
/// yields a flagged row, except an undefined pump power (U0 = 0), which
/// only blanks the power column.
pub fn evaluate_point(p: &DerivedParams, lambda: f64, detuning: f64) -> SweepRow {
    let eval = || -> Result<SweepRow> {
        let q = p.with_detuning(detuning)?;
        let lambda_c = dicke::critical_coupling(&q)?;
        let phase = dicke::steady_state(&q, lambda)?.phase;
        let photons = dicke::intracavity_photons(&q, lambda)?;
        let gb = gain::mechanical_gain(&q, lambda)?;
        let power = gain::pump_power(lambda, &q).unwrap_or(f64::NAN);
        Ok(SweepRow {
            lambda,
            detuning,
            lambda_c,
            phase: phase.as_str().into(),
            photons_cavity2: photons,
            delta_n: gb.delta_n,
            g0: gb.g0_term,
            g1: gb.g1_term,
            gain: gb.gain,
            n_b: gb.n_b,
            power,
        })
    };
    eval().unwrap_or_else(|_| SweepRow::singular(lambda, detuning))
}

/// Worker count from [`THREADS_ENV`]; `None` means let rayon decide.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Spec(format!("{THREADS_ENV}: {e}"))),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(Error::Spec(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}"))),
        },
    }
}

/// Evaluate every grid point of `spec`, concurrently, with rows returned
/// in grid order. Thread count follows [`THREADS_ENV`].
pub fn run_sweep(p: &DerivedParams, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    run_sweep_with_threads(p, spec, threads_from_env()?)
}

pub fn run_sweep_with_threads(p: &DerivedParams, spec: &SweepSpec, threads: Option<usize>) -> Result<Vec<SweepRow>> {
    let grid = spec.grid()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Spec(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| grid.par_iter().map(|&(l, d)| evaluate_point(p, l, d)).collect()))
}

pub fn write_csv<W: Write>(rows: &[SweepRow], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_line())?;
    }
    w.flush()?;
    Ok(())
}

/// JSON array of row objects. JSON has no NaN, so singular values are
/// written as `null`.
pub fn write_json<W: Write>(rows: &[SweepRow], mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, rows).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub detuning_rad_per_s: f64,
    pub lambda_c_rad_per_s: f64,
    pub lambda_th_rad_per_s: f64,
    pub p_th_watt: f64,
    pub delta_n_th: f64,
    pub gain_th_per_s: f64,
    pub n_b_th: f64,
}

impl ThresholdReport {
    fn entries(&self) -> [(&'static str, f64); 7] {
        [
            ("detuning_rad_per_s", self.detuning_rad_per_s),
            ("lambda_c_rad_per_s", self.lambda_c_rad_per_s),
            ("lambda_th_rad_per_s", self.lambda_th_rad_per_s),
            ("p_th_watt", self.p_th_watt),
            ("delta_n_th", self.delta_n_th),
            ("gain_th_per_s", self.gain_th_per_s),
            ("n_b_th", self.n_b_th),
        ]
    }

    /// `key = value` lines, one per field.
    pub fn key_values(&self) -> String {
        self.entries().iter().map(|(k, v)| format!("{k} = {}\n", fmt_f64(*v))).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields serialize")
    }

    pub fn summary(&self, mech_freq: f64) -> String {
        format!(
            "At detuning {:.4} w_m the superradiant transition sets in at lambda_c = {:.4e} rad/s.\n\
             Phonon lasing starts at lambda_th = {:.4e} rad/s ({:.3} mW pump), with inversion {:.4e}.\n",
            self.detuning_rad_per_s / mech_freq,
            self.lambda_c_rad_per_s,
            self.lambda_th_rad_per_s,
            self.p_th_watt * 1e3,
            self.delta_n_th,
        )
    }
}

/// λ_c, the lasing threshold λ_th, the pump power at λ_th and δn(λ_th) at
/// the given detuning.
pub fn report_threshold(p: &DerivedParams, detuning: f64) -> Result<ThresholdReport> {
    let q = p.with_detuning(detuning)?;
    let lambda_c = dicke::critical_coupling(&q)?;
    let lambda_th = gain::threshold_coupling(&q, None)?;
    let gb = gain::mechanical_gain(&q, lambda_th)?;
    Ok(ThresholdReport {
        detuning_rad_per_s: detuning,
        lambda_c_rad_per_s: lambda_c,
        lambda_th_rad_per_s: lambda_th,
        p_th_watt: gain::pump_power(lambda_th, &q)?,
        delta_n_th: gb.delta_n,
        gain_th_per_s: gb.gain,
        n_b_th: gb.n_b,
    })
}

/// λ_c over a detuning grid; NaN where the critical coupling is singular.
pub fn scan_critical(p: &DerivedParams, detunings: &Range) -> Result<Vec<(f64, f64)>> {
    detunings.validate("detuning")?;
    Ok(detunings.values().into_iter().map(|d| (d, dicke::critical_coupling_at(p, d).unwrap_or(f64::NAN))).collect())
}

/// Seed amplitude of both cavity fields for the normal-phase decay check.
pub const DECAY_SEED: f64 = 1e-3;
/// Required field suppression below λ_c.
pub const DECAY_RATIO: f64 = 1e-8;
/// Required relative agreement with the analytic fixed point above λ_c.
pub const RELAX_TOLERANCE: f64 = 1e-3;
/// Limit on the simulated time of either check (s).
pub const VALIDATION_T_MAX: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub lambda_rad_per_s: f64,
    pub lambda_c_rad_per_s: f64,
    pub phase: Phase,
    /// `relax` above λ_c, `decay` below.
    pub check: &'static str,
    /// Relative deviation from the analytic fixed point (relax), or
    /// final field magnitude relative to the seed (decay).
    pub residual: f64,
    pub tolerance: f64,
    pub conservation_drift: f64,
    /// Simulated time at which the check concluded (s).
    pub t_final: f64,
    pub steps: u64,
    pub converged: bool,
    pub passed: bool,
}

impl ValidationReport {
    pub fn key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "lambda_rad_per_s = {}", fmt_f64(self.lambda_rad_per_s));
        let _ = writeln!(s, "lambda_c_rad_per_s = {}", fmt_f64(self.lambda_c_rad_per_s));
        let _ = writeln!(s, "phase = {}", self.phase);
        let _ = writeln!(s, "check = {}", self.check);
        let _ = writeln!(s, "residual = {}", fmt_f64(self.residual));
        let _ = writeln!(s, "tolerance = {}", fmt_f64(self.tolerance));
        let _ = writeln!(s, "conservation_drift = {}", fmt_f64(self.conservation_drift));
        let _ = writeln!(s, "t_final_s = {}", fmt_f64(self.t_final));
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "converged = {}", self.converged);
        let _ = writeln!(s, "result = {}", if self.passed { "PASS" } else { "FAIL" });
        s
    }
}

/// Cross-check the mean-field dynamics against the analytic steady state.
///
/// Above λ_c the analytic fixed point is kicked by 1% and relaxed; the
/// residual must stay below 1e-3. Below λ_c both cavities are seeded with
/// a small field on the normal-phase spin and the fields must decay below
/// 1e-8 of the seed. Non-convergence is a failed report, not an error.
pub fn validate_dynamics(p: &DerivedParams, lambda: f64) -> Result<ValidationReport> {
    let lambda_c = dicke::critical_coupling(p)?;
    if lambda == lambda_c {
        return Err(Error::domain("validation is undefined exactly at the critical coupling"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    let analytic = dicke::steady_state(p, lambda)?;
    let base = ValidationReport {
        lambda_rad_per_s: lambda,
        lambda_c_rad_per_s: lambda_c,
        phase: analytic.phase,
        check: "",
        residual: f64::NAN,
        tolerance: 0.0,
        conservation_drift: f64::NAN,
        t_final: f64::NAN,
        steps: 0,
        converged: false,
        passed: false,
    };

    if lambda > lambda_c {
        let base = ValidationReport { check: "relax", tolerance: RELAX_TOLERANCE, ..base };
        return match relax_to_steady(p, lambda, 0.01, VALIDATION_T_MAX) {
            Ok(r) => Ok(ValidationReport {
                residual: r.deviation,
                conservation_drift: r.conservation_drift,
                t_final: r.t_converged,
                steps: r.stats.steps,
                converged: true,
                passed: r.deviation < RELAX_TOLERANCE,
                ..base
            }),
            Err(Error::NoConvergence { t, residual }) => Ok(ValidationReport { residual, t_final: t, ..base }),
            Err(e) => Err(e),
        };
    }

    let base = ValidationReport { check: "decay", tolerance: DECAY_RATIO, ..base };
    let seed = Complex64::new(DECAY_SEED, 0.0);
    let s0 = TwoCavityState { a1: seed, a2: seed, j_minus: Complex64::new(0.0, 0.0), j_z: analytic.j_z };
    // Confirm over ten recoil periods so a passing zero of an oscillation
    // does not count as decay.
    let hold = 10.0 * std::f64::consts::TAU / p.recoil_freq();
    match decay_fields(p, lambda, &s0, DECAY_RATIO, hold, VALIDATION_T_MAX) {
        Ok(d) => {
            let len0 = s0.spin_length_sq();
            Ok(ValidationReport {
                residual: d.final_ratio,
                conservation_drift: ((d.final_state.spin_length_sq() - len0) / len0).abs(),
                t_final: d.t_decayed,
                steps: d.stats.steps,
                converged: true,
                passed: d.final_ratio < DECAY_RATIO,
                ..base
            })
        }
        Err(Error::NoConvergence { t, residual }) => Ok(ValidationReport { residual, t_final: t, ..base }),
        Err(e) => Err(e),
    }
}
