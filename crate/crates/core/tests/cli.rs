use std::fs::File;
use std::path::Path;
use std::process::{Command, Output};

use skfb::report::{read_bounds, read_checks, read_leakage, read_simulate};
use skfb::SchemeVariant;

fn skfb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skfb")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    skfb(args).status.code().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn bad_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("empty_grid.cfg", "d_grid =\n"),
        ("duplicate_d.cfg", "d_grid = 0.1, 0.1\n"),
        ("zero_noise.cfg", "sigma_eta2 = 0\n"),
        ("negative_noise.cfg", "sigma_eta2 = -3\n"),
        ("unknown_key.cfg", "sigmas2 = 1\n"),
        ("d_too_large.cfg", "d_grid = 0.5, 1.5\n"),
    ] {
        let cfg = write_config(dir.path(), name, text);
        let out = skfb(&["bounds", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("config"), "{name}: {err}");
    }
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(code(&["simulate", "--seed", "1", "--trials", "0"]), 2);
    assert_eq!(code(&["simulate", "--seed", "1", "--n", "0", "--trials", "10"]), 2);
    assert_eq!(code(&["verify", "--seed", "1", "--suite", "chi2"]), 2);
    assert_eq!(code(&["verify", "--seed", "1", "--suite", "mgf", "--trials", "0"]), 2);
    assert_eq!(code(&["bounds", "--mode", "loose"]), 2);
}

#[test]
fn leakage_bound_holds_and_exits_zero() {
    assert_eq!(code(&["leakage", "--nmax", "50"]), 0);
    assert_eq!(code(&["leakage", "--variant", "classic", "--nmax", "50"]), 0);
}

#[test]
fn bounds_csv_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bounds.csv");
    let out_s = out.to_string_lossy();
    assert_eq!(code(&["bounds", "--out", &out_s]), 0);
    let rows = read_bounds(File::open(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 19);
    for r in &rows {
        let classic = r.rate_lower_classic.unwrap();
        let modified = r.rate_lower_modified.unwrap();
        assert!(modified >= classic);
        assert!(r.rate_upper.unwrap() >= modified);
        assert_eq!(r.n3, Some(85));
    }

    let cfg = write_config(dir.path(), "asym.cfg", "d_grid = 0.2, 0.4\nmodes = modified, upper_asymptotic\n");
    assert_eq!(code(&["bounds", "--config", &cfg, "--out", &out_s]), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("approximate"));
    let rows = read_bounds(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.rate_lower_classic.is_none() && r.rate_upper.is_some()));
}

#[test]
fn simulate_csv_roundtrip_and_seed_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sim.cfg", "d_grid = 0.1, 0.5, 0.9\nseed = 11\n");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let args = ["simulate", "--config", &cfg, "--n", "10", "--trials", "50000", "--out", &p.to_string_lossy()];
        assert_eq!(code(&args), 0);
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let rows = read_simulate(bytes.as_slice()).unwrap();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r.variant, SchemeVariant::Modified);
        assert_eq!((r.n, r.trials, r.seed), (10, 50_000, 11));
        assert_eq!(r.estimate, r.hits as f64 / r.trials as f64);
        assert!((r.estimate - r.exact).abs() <= r.ci_halfwidth.max(3.0 * (r.exact / 50_000.0).sqrt()));
    }
}

#[test]
fn generated_seed_is_reported() {
    let out = skfb(&["simulate", "--n", "2", "--trials", "100"]);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    let seed: u64 = err.trim().strip_prefix("seed: ").unwrap().parse().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains(&format!("seed={seed}")));
}

#[test]
fn leakage_and_verify_csv_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("leak.csv");
    assert_eq!(code(&["leakage", "--nmax", "30", "--out", &out.to_string_lossy()]), 0);
    let rows = read_leakage(File::open(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 30);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.n, i + 1);
        assert!(r.margin >= 0.0);
        assert!((r.f2_bound - r.exact_leakage - r.margin).abs() < 1e-10);
    }

    let out = dir.path().join("checks.csv");
    let args = ["verify", "--suite", "moments", "--seed", "3", "--trials", "20000", "--out", &out.to_string_lossy()];
    assert_eq!(code(&args), 0);
    let checks = read_checks(File::open(&out).unwrap()).unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c.verdict == "pass"));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    let mut codes = Vec::new();
    for threads in ["1", "4"] {
        let p = dir.path().join(format!("t{threads}.csv"));
        let args = ["verify", "--suite", "mgf", "--seed", "21", "--trials", "30000", "--threads", threads, "--out", &p.to_string_lossy()];
        codes.push(code(&args));
        outputs.push(std::fs::read(&p).unwrap());
    }
    assert_eq!(codes[0], codes[1]);
    assert!(!outputs[0].is_empty());
    assert_eq!(outputs[0], outputs[1]);
}
