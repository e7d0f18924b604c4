//! End-to-end runs of the `hardylab` binary: exit codes, reports and determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn hardylab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardylab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("HARDYLAB_LOG", "error")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, text: &str) -> String {
    let path = dir.path().join("scenarios.in.toml");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const EUCLID: &str = r#"
[[scenario]]
name = "euclid"
theorems = ["T3_4"]
actions = ["sweep"]
p = 2.0
geometry = { m = 3, n = 0, lambda = 0.0 }
domain = { kind = "punctured", t_max = "inf" }
pair = { family = "power", big_lambda = 0.0, beta = -2.0 }
"#;

#[test]
fn all_presets_verify() {
    let dir = TempDir::new().unwrap();
    let out = hardylab(&["all", "--plot"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}\n{}", String::from_utf8_lossy(&out.stderr));
    for file in ["audit.json", "verify.csv", "sweep.csv", "minimize.csv", "oracle.csv", "summary.json", "scenarios.toml"] {
        assert!(dir.path().join(file).is_file(), "missing {file}");
    }
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(sweep.starts_with(
        "scenario,epsilon,numerator,num_err,denominator,den_err,quotient,lower_bound,upper_bracket,verdict\n"
    ));
    assert!(!sweep.contains('\r'));
    assert!(sweep.lines().skip(1).all(|l| l.ends_with(",verified")));
    assert!(dir.path().join("plots/euclidean-point.svg").is_file());
    assert!(stdout.contains("expected failure reproduced: local_integrability"));
}

#[test]
fn inflated_constant_is_a_violation() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &EUCLID.replace("p = 2.0", "p = 2.0\nsharp_constant_scale = 1.01"));
    let out = hardylab(&["all", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(sweep.lines().last().unwrap().ends_with(",violated"));
}

#[test]
fn excluded_beta_is_a_configuration_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &EUCLID.replace("beta = -2.0", "beta = -3.0"));
    let out = hardylab(&["all", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta = -(m - n)"));
    assert!(!dir.path().join("summary.json").exists());
}

#[test]
fn every_problem_is_listed() {
    let dir = TempDir::new().unwrap();
    let text = format!(
        "{}{}",
        EUCLID.replace("T3_4", "T5_2").replace("beta = -2.0", "beta = -4.0"),
        EUCLID.replace("\"euclid\"", "\"great\"").replace("T3_4", "T6_3").replace("beta = -2.0", "beta = 1.0")
    );
    let cfg = write_config(&dir, &text);
    let out = hardylab(&["audit", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("T5_2 requires beta > -(m - n)"), "{err}");
    assert!(err.contains("T6_3 requires beta < -(m - n)"), "{err}");
}

#[test]
fn full_space_lower_bound_needs_p_plus_beta() {
    let dir = TempDir::new().unwrap();
    let text = EUCLID
        .replace("T3_4", "T6_3")
        .replace("punctured", "full_space")
        .replace("beta = -2.0", "beta = -5.5");
    let cfg = write_config(&dir, &text);
    let out = hardylab(&["audit", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p + beta > -(m - n)"));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &EUCLID.replace("p = 2.0", "p = 2.0\ncolour = \"blue\""));
    let out = hardylab(&["all", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
    let cfg = write_config(&dir, &EUCLID.replace("beta = -2.0", "beta = -2.0, gamma = 1.0"));
    assert_eq!(hardylab(&["all", "--config", &cfg], dir.path()).status.code(), Some(2));
}

#[test]
fn unknown_preset_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = hardylab(&["audit", "--preset", "torus"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("euclidean-point"));
}

#[test]
fn empty_config_is_an_empty_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "");
    let out = hardylab(&["all", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let summary = fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert_eq!(summary, "{\"exit_code\":0,\"scenarios\":[]}\n");
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["all", "--preset", "euclidean-point", "--preset", "hyperbolic-point", "--seed", "11", "--plot"];
    let ra = hardylab(&[&args[..], &["--jobs", "1"]].concat(), a.path());
    let rb = hardylab(&[&args[..], &["--jobs", "4"]].concat(), b.path());
    assert_eq!(ra.status.code(), Some(0));
    assert_eq!(rb.status.code(), Some(0));
    for file in [
        "audit.json",
        "verify.csv",
        "sweep.csv",
        "minimize.csv",
        "oracle.csv",
        "summary.json",
        "scenarios.toml",
        "plots/euclidean-point.svg",
    ] {
        let x = fs::read(a.path().join(file)).unwrap();
        let y = fs::read(b.path().join(file)).unwrap();
        assert!(x == y, "{file} differs between runs");
    }
    let oracle = fs::read_to_string(a.path().join("oracle.csv")).unwrap();
    assert!(oracle.lines().skip(1).all(|l| l.split(',').nth(2) == Some("11")));
}

#[test]
fn echoed_configuration_reruns_identically() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let first = hardylab(&["audit", "--preset", "sphere-great-sphere"], a.path());
    assert_eq!(first.status.code(), Some(0));
    let echo = a.path().join("scenarios.toml");
    let second = hardylab(&["audit", "--config", echo.to_str().unwrap()], b.path());
    assert_eq!(second.status.code(), Some(0));
    for file in ["audit.json", "summary.json", "scenarios.toml"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn improved_inequality_scenario() {
    let dir = TempDir::new().unwrap();
    let text = r#"
[[scenario]]
name = "improved-ball"
theorems = ["R5_6"]
actions = ["audit", "verify"]
p = 2.0
form = "theorem"
geometry = { m = 3, n = 0, lambda = 0.0 }
domain = { kind = "tube", t_max = 1.0 }
condition = { direction = "upper" }
pair = { family = "power", big_lambda = 0.0, beta = -1.0 }
improved = { d = 2.0, tau = 2.0 }
"#;
    let cfg = write_config(&dir, text);
    let out = hardylab(&["all", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let verify = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    for line in verify.lines().skip(1) {
        let residual: f64 = line.split(',').rev().nth(2).unwrap().parse().unwrap();
        assert!(residual > 0.0);
    }
    let cfg = write_config(&dir, &text.replace("improved = { d = 2.0, tau = 2.0 }\n", ""));
    assert_eq!(hardylab(&["all", "--config", &cfg], dir.path()).status.code(), Some(2));
}

#[test]
fn basis_table() {
    let dir = TempDir::new().unwrap();
    let out = hardylab(&["basis", "--preset", "euclidean-point", "--preset", "sphere-hemisphere"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("basis.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scenario,t,s_lambda,c_lambda,g_lambda_kappa,first_zero,t_lambda_kappa"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 200);
    for r in &rows {
        let (t, s, c, g): (f64, f64, f64, f64) =
            (r[1].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap(), r[4].parse().unwrap());
        if r[0] == "euclidean-point" {
            assert_eq!(s, t);
            assert_eq!(c, 1.0);
            assert!((g - 2.0 / t).abs() <= 1e-14 * g);
            assert_eq!(r[5], "inf");
        } else {
            assert!((s - t.sin()).abs() <= 1e-15);
            assert!((c - t.cos()).abs() <= 1e-15);
            assert!((g + t.tan()).abs() <= 1e-12 * (1.0 + g.abs()));
            assert!((r[5].parse::<f64>().unwrap() - std::f64::consts::FRAC_PI_2).abs() <= 1e-15);
        }
    }
}
