//! End-to-end checks of the `superlase` binary: output formats, exit
//! codes, determinism across thread counts and config diagnostics.

use std::path::Path;
use std::process::{Command, Output};

use superlase::config::PAPER_CFG;
use superlase::sweep::CSV_HEADER;

fn superlase(args: &[&str]) -> Output {
    superlase_env(args, &[])
}

fn superlase_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_superlase"));
    cmd.args(args).env_remove("SUPERLASE_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// The bundled preset with `key` replaced by `key = value`.
fn config_with(key: &str, value: &str) -> String {
    let mut hit = false;
    let text: Vec<String> = PAPER_CFG
        .lines()
        .map(|l| {
            if l.split('=').next().map(str::trim) == Some(key) {
                hit = true;
                format!("{key} = {value}")
            } else {
                l.to_owned()
            }
        })
        .collect();
    assert!(hit, "{key} not in preset");
    text.join("\n")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn sweep_csv_rows_are_self_consistent() {
    let o = superlase(&["sweep", "--lambda", "0:9e6:40"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some(CSV_HEADER));
    let rows = rows(&out);
    assert_eq!(rows.len(), 40);
    let mut last_lambda = -1.0;
    for r in &rows {
        assert_eq!(r.len(), 11);
        let f = |i: usize| r[i].parse::<f64>().unwrap();
        assert!(f(0) > last_lambda, "rows ascending");
        last_lambda = f(0);
        // G = G0 + G1 and N_b recomputed from the row's own G.
        assert_eq!(f(8), f(6) + f(7));
        assert_eq!(f(9), (2.0 * (f(8) - 100.0) / 100.0).exp());
        let expected_phase = if f(0) > f(2) { "superradiant" } else { "normal" };
        assert_eq!(r[3], expected_phase);
    }
}

#[test]
fn sweep_is_byte_identical_across_thread_counts() {
    let args = ["sweep", "--lambda", "1e5:1e7:97:log", "--detuning", "3e7:1.2e8:13"];
    let one = superlase_env(&args, &[("SUPERLASE_THREADS", "1")]);
    let four = superlase_env(&args, &[("SUPERLASE_THREADS", "4")]);
    let auto = superlase_env(&args, &[("SUPERLASE_THREADS", "0")]);
    assert_eq!(code(&one), 0, "{}", stderr(&one));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, auto.stdout);
    assert_eq!(stdout(&one).lines().count(), 1 + 97 * 13);

    let bad = superlase_env(&args, &[("SUPERLASE_THREADS", "many")]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn singular_points_become_flagged_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "flat.cfg", &config_with("collective_stark_nu0_two_pi_hz", "0"));
    let o = superlase(&["--config", &cfg, "sweep", "--lambda", "1e6", "--detuning", "-1e6:1e6:3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = rows(&stdout(&o));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][1], "0");
    assert!(rows[1][2..].iter().all(|c| c == "nan"), "{:?}", rows[1]);
    assert_ne!(rows[0][3], "nan");

    let o = superlase(&["--config", &cfg, "sweep", "--lambda", "1e6", "--detuning", "-1e6:1e6:3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v[1]["G_per_s"].is_null());
    assert_eq!(v[1]["phase"], "nan");

    // The threshold report at that detuning is a numerical error: exit 3.
    let o = superlase(&["--config", &cfg, "threshold", "--detuning", "0"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("singular"), "{}", stderr(&o));
    let o = superlase(&["--config", &cfg, "threshold", "--detuning", "0", "--json"]);
    assert_eq!(code(&o), 3);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["error"], "singular");
}

#[test]
fn json_rows_use_the_csv_header_keys() {
    let o = superlase(&["sweep", "--lambda", "1e6:8e6:4", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let mut keys: Vec<&str> = rows[0].as_object().unwrap().keys().map(String::as_str).collect();
    let mut header: Vec<&str> = CSV_HEADER.split(',').collect();
    keys.sort_unstable();
    header.sort_unstable();
    assert_eq!(keys, header);
}

#[test]
fn preset_writes_file_matching_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    let o = superlase(&["preset", "fig2", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let file = std::fs::read_to_string(&path).unwrap();
    let piped = superlase(&["preset", "fig2"]);
    assert_eq!(file, stdout(&piped));

    // Same grid for fig3; G crosses γm where N_b crosses 1, near 7.6e6 rad/s.
    let fig3 = stdout(&superlase(&["preset", "fig3"]));
    assert_eq!(fig3, file);
    let rows = rows(&file);
    assert_eq!(rows.len(), 500);
    let i = rows.iter().position(|r| r[8].parse::<f64>().unwrap() > 100.0).unwrap();
    assert!(rows[i][9].parse::<f64>().unwrap() > 1.0 && rows[i - 1][9].parse::<f64>().unwrap() < 1.0);
    let (lo, hi): (f64, f64) = (rows[i - 1][0].parse().unwrap(), rows[i][0].parse().unwrap());
    assert!(lo < 7.6e6 && 7.6e6 < hi + (hi - lo), "crossing at [{lo}, {hi}]");
}

#[test]
fn threshold_report_keys_and_json() {
    let o = superlase(&["threshold", "--detuning-wm", "0.5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let value = |key: &str| -> f64 {
        out.lines()
            .find_map(|l| l.strip_prefix(&format!("{key} = ")))
            .unwrap_or_else(|| panic!("{key} missing:\n{out}"))
            .parse()
            .unwrap()
    };
    assert!((value("lambda_c_rad_per_s") / 0.416e6 - 1.0).abs() < 1e-3);
    assert!((value("lambda_th_rad_per_s") / 7.6e6 - 1.0).abs() < 0.02);
    assert!((value("p_th_watt") / 6.4e-3 - 1.0).abs() < 0.05);
    assert!(out.lines().any(|l| l.starts_with('#')), "human summary missing");

    let o = superlase(&["threshold", "--json", "--minimize-wm", "0.05:1", "--scan-wm", "0.1:1:10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["lambda_c_rad_per_s", "lambda_th_rad_per_s", "p_th_watt", "delta_n_th"] {
        assert!(v[key].is_number(), "{key} missing from {v}");
    }
    assert_eq!(v["scan"].as_array().map(Vec::len), Some(10));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", &config_with("cavity_loss_two_pi_hz", "fast"));
    let o = superlase(&["--config", &cfg, "threshold"]);
    assert_eq!(code(&o), 2);
    let line = PAPER_CFG.lines().position(|l| l.starts_with("cavity_loss_two_pi_hz")).unwrap() + 1;
    assert!(stderr(&o).contains(&format!("line {line}")), "{}", stderr(&o));

    let cfg = write(dir.path(), "unit.cfg", &PAPER_CFG.replace("mech_damping_per_s", "mech_damping"));
    let o = superlase(&["--config", &cfg, "sweep", "--lambda", "1e6"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("mech_damping"), "{}", stderr(&o));

    let missing = dir.path().join("absent.cfg");
    let o = superlase(&["--config", missing.to_str().unwrap(), "threshold"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn invalid_ranges_are_spec_errors() {
    for spec in ["5e6:5e6:10", "1e6:2e6:1", "0:1e7:20:log", "1e6:2e6", "x"] {
        let o = superlase(&["sweep", "--lambda", spec]);
        assert_eq!(code(&o), 2, "--lambda {spec}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
    let o = superlase(&["sweep", "--lambda", "-1e6"]);
    assert_eq!(code(&o), 2);
    let o = superlase(&["sweep"]);
    assert_eq!(code(&o), 2, "missing required flag is a usage error");
    let o = superlase(&["threshold", "--detuning", "1e7", "--detuning-wm", "0.5"]);
    assert_eq!(code(&o), 2);
}

/// All optical rates scaled down 1000×: the same physics on slow time
/// scales, so the dynamics runs take milliseconds.
fn slow_config(dir: &Path) -> String {
    let mut text = PAPER_CFG.to_owned();
    for (key, value) in [
        ("pump_cavity_detuning_two_pi_hz", "10e3"),
        ("cavity_loss_two_pi_hz", "1e3"),
        ("cavity_coupling_two_pi_hz", "10e3"),
        ("collective_stark_nu0_two_pi_hz", "-2e3"),
        ("mech_freq_two_pi_hz", "20e3"),
    ] {
        let old = PAPER_CFG.lines().find(|l| l.starts_with(key)).unwrap();
        text = text.replace(old, &format!("{key} = {value}"));
    }
    write(dir, "slow.cfg", &text)
}

#[test]
fn validate_passes_and_fails_with_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = slow_config(dir.path());

    let o = superlase(&["--config", &cfg, "validate", "--lambda-over-c", "1.5", "--json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["check"], "relax");
    assert_eq!(v["phase"], "superradiant");
    assert!(v["residual"].as_f64().unwrap() < 1e-3);
    assert!(v["conservation_drift"].as_f64().unwrap() < 1e-6);

    let o = superlase(&["--config", &cfg, "validate", "--lambda-over-c", "0.5"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("check = decay"));

    // Just below λc the normal phase relaxes too slowly for the 5 s window.
    let o = superlase(&["--config", &cfg, "validate", "--lambda-over-c", "0.9999", "--json"]);
    assert_eq!(code(&o), 4, "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["converged"], false);
    assert_eq!(v["passed"], false);

    let o = superlase(&["validate", "--lambda-over-c", "1"]);
    assert_eq!(code(&o), 2, "exactly at λc is a domain error");
}

#[test]
fn version_and_help() {
    let o = superlase(&["--version"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains(env!("CARGO_PKG_VERSION")));
    let o = superlase(&["--help"]);
    for sub in ["sweep", "threshold", "validate", "preset"] {
        assert!(stdout(&o).contains(sub));
    }
}
