use std::path::Path;

use fusedfocus::checks::{self, FailureKind};
use fusedfocus::cli::{self, Command};
use fusedfocus::config::{Format, RunConfig, SystemKind};
use proptest::prelude::*;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: Vec<u8>,
    stderr: String,
}

fn run_with_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let lookup = |k: &str| env.iter().find(|(n, _)| *n == k).map(|(_, v)| v.to_string());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["fusedfocus"];
    argv.extend_from_slice(args);
    let code = cli::main_with(argv, &lookup, &mut out, &mut err);
    Run { code, stdout: out, stderr: String::from_utf8_lossy(&err).into_owned() }
}

fn run(args: &[&str]) -> Run {
    run_with_env(args, &[])
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn json(r: &Run) -> Value {
    assert_eq!(r.code, 0, "{}", r.stderr);
    serde_json::from_slice(&r.stdout).unwrap()
}

#[test]
fn sliding_report_for_positive_eps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[params]\nepsilon = 0.05\n");
    let v = json(&run(&["sliding", "--config", &cfg, "--format", "json", "--stdout"]));
    assert!((v["lo"].as_f64().unwrap() - 0.8125).abs() < 1e-12);
    assert!((v["hi"].as_f64().unwrap() - 0.9375).abs() < 1e-12);
    assert_eq!(v["stability"], "stable");
}

#[test]
fn sliding_report_is_unstable_for_negative_eps() {
    let v = json(&run_with_env(&["sliding", "--format", "json", "--stdout"], &[("FUSEDFOCUS_EPSILON", "-0.05")]));
    assert_eq!(v["stability"], "unstable");
    assert!((v["lo"].as_f64().unwrap() - 0.5625).abs() < 1e-12);
    assert!((v["hi"].as_f64().unwrap() - 0.6875).abs() < 1e-12);
}

#[test]
fn sliding_report_collapses_at_zero() {
    let v = json(&run(&["sliding", "--format", "json", "--stdout"]));
    assert_eq!(v["stability"], "collapsed");
    assert_eq!(v["lo"], v["hi"]);
}

#[test]
fn outputs_land_in_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results");
    let out_s = out.display().to_string();
    for (cmd, header) in [("simulate", "run,t,x,y,mode,event"), ("sliding", "kind,from_x,from_y,to_x,to_y")] {
        let r = run(&[cmd, "--out", &out_s]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert!(r.stdout.is_empty());
        let text = std::fs::read_to_string(out.join(format!("{cmd}.csv"))).unwrap();
        assert_eq!(text.lines().next(), Some(header));
    }
}

#[test]
fn simulate_writes_the_ts_chart_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[simulate]\nchart = \"ts\"\nt_span = [0.0, 5.0]\n");
    let r = run(&["simulate", "--config", &cfg, "--stdout"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = String::from_utf8(r.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("run,t,T,S,mode,event"));
}

#[test]
fn phase_portrait_marks_both_virtual_equilibria() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[params]\nepsilon = -0.1\n[simulate]\nt_span = [0.0, 20.0]\n");
    let r = run(&["simulate", "--config", &cfg, "--format", "svg", "--stdout"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let svg = String::from_utf8(r.stdout).unwrap();
    let red_dots = svg.lines().filter(|l| l.starts_with("<circle") && l.contains("#d62728")).count();
    assert_eq!(red_dots, 2);
}

#[test]
fn periodic_orbit_is_drawn_at_minus_four_hundredths() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[params]\nepsilon = -0.04\n[simulate]\ninitial = [[0.65, 0.001]]\nt_span = [0.0, 200.0]\n");
    let v = json(&run(&["simulate", "--config", &cfg, "--format", "json", "--stdout"]));
    let ups: Vec<f64> = v["runs"][0]["events"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["kind"] == "crossing_in")
        .map(|e| e["state"][0].as_f64().unwrap())
        .collect();
    assert!(ups.len() > 20, "only {} upward crossings", ups.len());
    let tail = &ups[ups.len() - 2..];
    assert!((tail[0] - tail[1]).abs() < 1e-8, "crossings not converged: {tail:?}");
    assert!(tail[1] > 0.7, "closed orbit must enclose the sliding segment: {tail:?}");
}

#[test]
fn empty_time_span_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[simulate]\nt_span = [3.0, 3.0]\n");
    let r = run(&["simulate", "--config", &cfg, "--stdout"]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.is_empty());
}

#[test]
fn unknown_keys_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[params]\nepsilon = 0.0\ngamma = 1.0\n");
    assert_eq!(run(&["sliding", "--config", &cfg]).code, 1);
}

#[test]
fn blowup_requires_positive_a() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "system = \"welander-smooth\"\n[params]\na = 0.0\n");
    assert_eq!(run(&["blowup", "--config", &cfg, "--stdout"]).code, 1);
}

#[test]
fn blowup_rejects_a_malformed_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write_config(dir.path(), "system = \"welander-smooth\"\n[params]\na = 0.01\n[blowup]\neps_range = [0.02, -0.1]\n");
    assert_eq!(run(&["blowup", "--config", &cfg, "--stdout"]).code, 1);
}

#[test]
fn trace_crosses_zero_once_at_a_hundredth() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "system = \"welander-smooth\"\n[params]\na = 0.01\n[blowup]\nnumeric = false\n");
    let r = run(&["blowup", "--config", &cfg, "--stdout"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let mut rdr = csv::Reader::from_reader(r.stdout.as_slice());
    let trace: Vec<f64> = rdr.records().map(|rec| rec.unwrap()[1].parse().unwrap()).collect();
    let changes = trace.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    assert_eq!(changes, 1);
}

#[test]
fn three_point_scan_gives_the_three_regimes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[scan]\neps = [0.04, -0.04, 0.0, 0.04]\n");
    let r = run(&["scan", "--config", &cfg, "--stdout"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let mut rdr = csv::Reader::from_reader(r.stdout.as_slice());
    let rows: Vec<(String, String)> = rdr.records().map(|rec| rec.unwrap()).map(|r| (r[1].to_string(), r[3].to_string())).collect();
    let want = [("-0.04", "PeriodicOrbit"), ("0", "FocusPoint"), ("0.04", "SlidingAttractor")];
    assert_eq!(rows, want.map(|(e, a)| (e.to_string(), a.to_string())));
}

#[test]
fn flags_beat_environment_beats_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[params]\nepsilon = 0.05\n[output]\nformat = \"csv\"\n");
    let env = [("FUSEDFOCUS_EPSILON", "0.02"), ("FUSEDFOCUS_FORMAT", "svg"), ("FUSEDFOCUS_CONFIG", cfg.as_str())];
    let v = json(&run_with_env(&["sliding", "--format", "json", "--stdout"], &env));
    assert_eq!(v["epsilon"].as_f64(), Some(0.02));
    let r = run_with_env(&["sliding", "--stdout"], &env);
    assert!(String::from_utf8(r.stdout).unwrap().starts_with("<svg"));
}

#[test]
fn bad_environment_value_is_a_config_error() {
    assert_eq!(run_with_env(&["sliding", "--stdout"], &[("FUSEDFOCUS_THREADS", "many")]).code, 1);
}

#[test]
fn missing_config_file_is_a_config_error() {
    let r = run(&["sliding", "--config", "/nonexistent/fusedfocus.toml"]);
    assert_eq!(r.code, 1);
}

#[test]
fn verify_has_no_svg_output() {
    assert_eq!(run(&["verify", "--format", "svg", "--stdout"]).code, 1);
}

#[test]
fn failures_map_to_exit_codes() {
    for (i, kind) in [FailureKind::Config, FailureKind::Numerics, FailureKind::Io].into_iter().enumerate() {
        checks::exit_code_contract(kind, 1000 + i as u64).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reruns_give_identical_bytes(eps in -0.05..0.05f64, which in 0usize..3, fmt in 0usize..3, x in 0.4..1.1f64, y in -0.2..0.2f64) {
        let mut cfg = RunConfig::default();
        cfg.params.epsilon = eps;
        cfg.output.format = [Format::Csv, Format::Json, Format::Svg][fmt];
        let cmd = match which {
            0 => Command::Sliding,
            1 => {
                cfg.simulate.t_span = [0.0, 5.0];
                cfg.simulate.initial = vec![[x, y]];
                Command::Simulate
            }
            _ => {
                cfg.system = SystemKind::WelanderSmooth;
                cfg.params.a = 0.01;
                cfg.blowup.points = 21;
                cfg.blowup.numeric = false;
                Command::Blowup
            }
        };
        checks::cli_determinism(cmd, &cfg).map_err(TestCaseError::fail)?;
    }
}
