//! Command-line front end: sweeps, figure presets, threshold reports and
//! the dynamics cross-check.
//!
//! Exit status: 0 success, 2 config or usage error, 3 numerical
//! singularity, 4 validation failure.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use superlase::config::{load_config, paper_config};
use superlase::dicke;
use superlase::format::fmt_f64;
use superlase::sweep::{self, Axis, Preset, Range, Spacing, SweepSpec};
use superlase::{derive, DerivedParams, Error};

const EXIT_CONFIG: u8 = 2;
const EXIT_SINGULAR: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

#[derive(Parser)]
#[command(
    name = "superlase",
    version,
    about = "Superradiance-driven phonon laser: sweeps, thresholds and dynamics checks"
)]
struct Cli {
    /// Parameter file (sectioned key = value). Defaults to the bundled preset.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate gain, photons and power over a (λ, Δc) grid.
    Sweep(SweepArgs),
    /// Report λ_c, the lasing threshold and the pump power it needs.
    Threshold(ThresholdArgs),
    /// Integrate the mean-field equations and compare with the analytic steady state.
    Validate(ValidateArgs),
    /// Regenerate figure data on the fixed preset grid.
    Preset(PresetArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; standard output when omitted.
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Coupling λ in rad/s: a single value or MIN:MAX:POINTS[:log].
    #[arg(long, value_name = "SPEC")]
    lambda: String,
    /// Detuning Δc in rad/s: a single value or MIN:MAX:POINTS[:log].
    /// Defaults to the config value.
    #[arg(long, value_name = "SPEC", allow_hyphen_values = true)]
    detuning: Option<String>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Detuning Δc in rad/s. Defaults to the config value.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "detuning_wm")]
    detuning: Option<f64>,
    /// Detuning Δc as a fraction of ω_m.
    #[arg(long, value_name = "FRACTION", allow_hyphen_values = true)]
    detuning_wm: Option<f64>,
    /// Also minimize λ_c over Δc in [MIN, MAX]·ω_m.
    #[arg(long, value_name = "MIN:MAX")]
    minimize_wm: Option<String>,
    /// Also tabulate λ_c over Δc = MIN:MAX:POINTS in units of ω_m.
    #[arg(long, value_name = "MIN:MAX:POINTS")]
    scan_wm: Option<String>,
    /// Emit a JSON object instead of key = value lines.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Coupling λ in rad/s.
    #[arg(long, conflicts_with = "lambda_over_c", required_unless_present = "lambda_over_c")]
    lambda: Option<f64>,
    /// Coupling as a multiple of λ_c.
    #[arg(long, value_name = "RATIO")]
    lambda_over_c: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetName {
    Fig2,
    Fig3,
}

#[derive(Args)]
struct PresetArgs {
    #[arg(value_enum)]
    name: PresetName,
    #[command(flatten)]
    out: OutputArgs,
}

/// Failure with the exit status it maps to.
struct Failure {
    code: u8,
    error: Option<Error>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config { .. } | Error::Spec(_) | Error::Domain(_) | Error::Io(_) => EXIT_CONFIG,
            Error::NoConvergence { .. } => EXIT_VALIDATION,
            Error::Singular { .. }
            | Error::NoMinimum(_)
            | Error::Bracket { .. }
            | Error::Stiffness { .. }
            | Error::StepLimit { .. }
            | Error::Divergence { .. } => EXIT_SINGULAR,
        };
        Failure { code, error: Some(e) }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Error::Spec(msg.into()).into()
}

fn parse_f64(s: &str, what: &str) -> Result<f64, Failure> {
    s.trim().parse::<f64>().map_err(|_| usage(format!("{what}: cannot parse {s:?} as a number")))
}

/// `X` or `MIN:MAX:POINTS[:log|:lin]`.
fn parse_axis(s: &str, what: &str) -> Result<Axis, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [x] => Ok(Axis::Fixed(parse_f64(x, what)?)),
        [min, max, points, rest @ ..] if rest.len() <= 1 => {
            let spacing = match rest.first().map(|r| r.trim()) {
                None | Some("lin") => Spacing::Linear,
                Some("log") => Spacing::Log,
                Some(other) => return Err(usage(format!("{what}: unknown spacing {other:?}"))),
            };
            let points = points
                .trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("{what}: points must be a positive integer, got {points:?}")))?;
            Ok(Axis::Swept(Range { min: parse_f64(min, what)?, max: parse_f64(max, what)?, points, spacing }))
        }
        _ => Err(usage(format!("{what}: expected X or MIN:MAX:POINTS[:log], got {s:?}"))),
    }
}

/// Write `bytes` to `path`, or to standard output when `None`. A reader
/// that closes the pipe early (`| head`) is not an error.
fn emit(path: &Option<PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    let res = match path {
        Some(p) => File::create(p).and_then(|mut f| f.write_all(bytes)),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush())
        }
    };
    match res {
        Err(e) if path.is_none() && e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => other.map_err(|e| Error::from(e).into()),
    }
}

fn write_rows(rows: &[sweep::SweepRow], out: &OutputArgs) -> Result<(), Failure> {
    let mut buf = Vec::new();
    match out.format {
        Format::Csv => sweep::write_csv(rows, &mut buf)?,
        Format::Json => sweep::write_json(rows, &mut buf)?,
    }
    emit(&out.output, &buf)
}

fn cmd_sweep(p: &DerivedParams, args: &SweepArgs) -> Result<(), Failure> {
    let spec = SweepSpec {
        lambda: parse_axis(&args.lambda, "--lambda")?,
        detuning: match &args.detuning {
            Some(s) => parse_axis(s, "--detuning")?,
            None => Axis::Fixed(p.raw().pump_cavity_detuning),
        },
    };
    let rows = sweep::run_sweep(p, &spec)?;
    write_rows(&rows, &args.out)
}

fn cmd_preset(p: &DerivedParams, args: &PresetArgs) -> Result<(), Failure> {
    let preset = match args.name {
        PresetName::Fig2 => Preset::Fig2,
        PresetName::Fig3 => Preset::Fig3,
    };
    let rows = sweep::run_sweep(p, &preset.spec(p))?;
    write_rows(&rows, &args.out)
}

fn cmd_threshold(p: &DerivedParams, args: &ThresholdArgs) -> Result<(), Failure> {
    let wm = p.raw().mech_freq;
    let detuning = match (args.detuning, args.detuning_wm) {
        (Some(d), _) => d,
        (None, Some(f)) => f * wm,
        (None, None) => p.raw().pump_cavity_detuning,
    };

    let minimum = match &args.minimize_wm {
        Some(s) => {
            let (lo, hi) = s.split_once(':').ok_or_else(|| usage("--minimize-wm expects MIN:MAX"))?;
            let (lo, hi) = (parse_f64(lo, "--minimize-wm")?, parse_f64(hi, "--minimize-wm")?);
            Some(dicke::minimize_critical_coupling(p, lo * wm, hi * wm, 2000)?)
        }
        None => None,
    };
    let scan = match &args.scan_wm {
        Some(s) => match parse_axis(s, "--scan-wm")? {
            Axis::Swept(r) => {
                let r = Range { min: r.min * wm, max: r.max * wm, ..r };
                Some(sweep::scan_critical(p, &r)?)
            }
            Axis::Fixed(_) => return Err(usage("--scan-wm expects MIN:MAX:POINTS")),
        },
        None => None,
    };

    let report = match sweep::report_threshold(p, detuning) {
        Ok(r) => r,
        Err(e) => {
            if args.json {
                println!("{}", error_json(&e));
            }
            return Err(e.into());
        }
    };

    let mut out = String::new();
    if args.json {
        let mut obj = serde_json::to_value(&report).expect("report serializes");
        if let Some(m) = &minimum {
            obj["minimum_detuning_rad_per_s"] = json!(m.detuning);
            obj["minimum_lambda_c_rad_per_s"] = json!(m.lambda_c);
        }
        if let Some(scan) = &scan {
            obj["scan"] =
                scan.iter().map(|(d, l)| json!({ "detuning_rad_per_s": d, "lambda_c_rad_per_s": l })).collect();
        }
        out = serde_json::to_string_pretty(&obj).expect("json") + "\n";
    } else {
        out.push_str(&report.key_values());
        if let Some(m) = &minimum {
            let _ = writeln!(out, "minimum_detuning_rad_per_s = {}", fmt_f64(m.detuning));
            let _ = writeln!(out, "minimum_lambda_c_rad_per_s = {}", fmt_f64(m.lambda_c));
        }
        for line in report.summary(wm).lines() {
            let _ = writeln!(out, "# {line}");
        }
        if let Some(m) = &minimum {
            let _ = writeln!(
                out,
                "# lambda_c is smallest, {:.4e} rad/s, at detuning {:.4} w_m.",
                m.lambda_c,
                m.detuning / wm
            );
        }
        if let Some(scan) = &scan {
            let _ = writeln!(out, "\ndetuning_rad_per_s,detuning_over_wm,lambda_c_rad_per_s");
            for (d, l) in scan {
                let _ = writeln!(out, "{},{},{}", fmt_f64(*d), fmt_f64(d / wm), fmt_f64(*l));
            }
        }
    }
    emit(&None, out.as_bytes())
}

fn cmd_validate(p: &DerivedParams, args: &ValidateArgs) -> Result<(), Failure> {
    let lambda = match (args.lambda, args.lambda_over_c) {
        (Some(l), _) => l,
        (None, Some(r)) => r * dicke::critical_coupling(p)?,
        (None, None) => return Err(usage("one of --lambda or --lambda-over-c is required")),
    };
    let report = sweep::validate_dynamics(p, lambda)?;
    let text =
        if args.json { serde_json::to_string_pretty(&report).expect("json") + "\n" } else { report.key_values() };
    emit(&None, text.as_bytes())?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure { code: EXIT_VALIDATION, error: None })
    }
}

fn error_json(e: &Error) -> String {
    let v = match e {
        Error::Singular { detuning, denominator } => json!({
            "error": "singular",
            "detuning_rad_per_s": detuning,
            "denominator": denominator,
            "message": e.to_string(),
        }),
        Error::Bracket { lo, hi, f_lo, f_hi } => json!({
            "error": "bracket",
            "lo_rad_per_s": lo,
            "hi_rad_per_s": hi,
            "gain_excess_lo_per_s": f_lo,
            "gain_excess_hi_per_s": f_hi,
            "message": e.to_string(),
        }),
        _ => json!({ "error": "failure", "message": e.to_string() }),
    };
    serde_json::to_string_pretty(&v).expect("json")
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let raw = match &cli.config {
        Some(path) => load_config(path)?,
        None => paper_config(),
    };
    let p = derive(raw)?;
    match &cli.command {
        Command::Sweep(a) => cmd_sweep(&p, a),
        Command::Threshold(a) => cmd_threshold(&p, a),
        Command::Validate(a) => cmd_validate(&p, a),
        Command::Preset(a) => cmd_preset(&p, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(e) = f.error {
                eprintln!("superlase: {e}");
            }
            ExitCode::from(f.code)
        }
    }
}
