//! End-to-end CLI checks: reproducibility, summary contents, exit codes.

use std::fs;
use std::path::Path;
use std::process::Command;

use maxkin::config::{parse_config, Task};
use maxkin::run::run_config_text;

const FAST_NUMERICS: &str = "grid_size = 2049\nx_min = 1e-8\nx_max = 1e6\n";

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn spectral_run_reports_the_elastic_minimizer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("seed = 7\n[model]\npreset = elastic\nd = 3\n[numerics]\n{FAST_NUMERICS}");
    run_config_text(&cfg, Task::Spectral, dir.path()).unwrap();
    let summary = read(dir.path(), "summary.txt");
    assert!(summary.contains("p0 = 2.41421356"), "summary:\n{summary}");
    assert!(summary.contains("mu1 = 0.0"), "summary:\n{summary}");
    assert!(summary.contains("class = b"), "summary:\n{summary}");
    assert!(summary.contains("s_star = inf"), "summary:\n{summary}");
    let csv = read(dir.path(), "spectral.csv");
    assert!(csv.starts_with("# maxkin spectral"));
    assert!(csv.contains("p,lambda,mu"));
}

#[test]
fn thermostat_spectral_includes_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("[model]\npreset = thermostat\nd = 3\nm = 1.0\ntheta = 1.5\n[numerics]\n{FAST_NUMERICS}");
    run_config_text(&cfg, Task::Spectral, dir.path()).unwrap();
    let summary = read(dir.path(), "summary.txt");
    assert!(summary.contains("theta_star = 2.0000000000"), "summary:\n{summary}");
}

#[test]
fn identical_config_and_seed_give_byte_identical_outputs() {
    let cfg = format!(
        "seed = 11\n[model]\npreset = inelastic\nd = 3\ne = 0.5\n[numerics]\n{FAST_NUMERICS}tol = 1e-9\nmax_iter = 200\n"
    );
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    run_config_text(&cfg, Task::Profile, dir_a.path()).unwrap();
    run_config_text(&cfg, Task::Profile, dir_b.path()).unwrap();
    for name in ["profile.csv", "summary.txt"] {
        let a = fs::read(dir_a.path().join(name)).unwrap();
        let b = fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn profile_run_converges_and_reports_residual() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[model]\npreset = inelastic\nd = 3\ne = 0.5\n[numerics]\ngrid_size = 8193\ntol = 1e-9\np = 1.0\n";
    run_config_text(cfg, Task::Profile, dir.path()).unwrap();
    let summary = read(dir.path(), "summary.txt");
    let residual: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("residual_integral = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual < 1e-6, "residual {residual}");
    assert!(summary.contains("bounds_ok = true"));
    assert!(summary.contains("monotone_ok = true"));
}

#[test]
fn evolve_writes_states_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        "[model]\npreset = elastic\nd = 3\n[numerics]\n{FAST_NUMERICS}dt = 0.05\nt_end = 0.3\nout_stride = 0.1\n"
    );
    run_config_text(&cfg, Task::Evolve, dir.path()).unwrap();
    let diag = read(dir.path(), "diagnostics.csv");
    assert!(diag.contains("t,u0val,slope0,supnorm"));
    // 0.0, 0.1, 0.2, 0.3 recorded
    assert_eq!(diag.lines().filter(|l| !l.starts_with('#') && !l.starts_with('t')).count(), 4);
    let states = read(dir.path(), "states.csv");
    assert!(states.contains("t,x,u"));
    let summary = read(dir.path(), "summary.txt");
    assert!(summary.contains("final_u0val = 1.0000000000"), "summary:\n{summary}");
}

#[test]
fn moments_csv_marks_divergent_orders() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("[model]\npreset = inelastic\nd = 3\ne = 0.5\n[numerics]\n{FAST_NUMERICS}s_max = 6\n");
    run_config_text(&cfg, Task::Moments, dir.path()).unwrap();
    let csv = read(dir.path(), "moments.csv");
    // s* ≈ 4.13 for e = 1/2: orders 5, 6 divergent
    assert!(csv.contains("\n5,div,divergent"), "csv:\n{csv}");
    assert!(csv.contains("exact m_2 = 9/7"), "csv:\n{csv}");
    let summary = read(dir.path(), "summary.txt");
    assert!(summary.contains("exact_arithmetic = true"));
    assert!(summary.contains("s_star = 4.12691"), "summary:\n{summary}");
}

#[test]
fn invert_reports_mass_and_tail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        "[model]\npreset = inelastic\nd = 3\ne = 0.5\n[numerics]\n{FAST_NUMERICS}tol = 1e-9\nr_max = 12\nr_samples = 61\ndim = 3\n"
    );
    run_config_text(&cfg, Task::Invert, dir.path()).unwrap();
    let summary = read(dir.path(), "summary.txt");
    let mass: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("mass = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mass - 1.0).abs() < 2e-2, "mass {mass}");
}

#[test]
fn model_file_round_trips_through_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let model = maxkin_core::model::MaxwellModel::inelastic(3, 0.5, 16).unwrap();
    let path = dir.path().join("model.txt");
    fs::write(&path, maxkin::modelfile::write_model(&model, "test")).unwrap();
    let cfg = format!(
        "[model]\nfile = {}\n[numerics]\n{FAST_NUMERICS}s_max = 3\n",
        path.display()
    );
    run_config_text(&cfg, Task::Moments, dir.path()).unwrap();
    let summary = read(dir.path(), "summary.txt");
    assert!(summary.contains("mu1 = -1.875"), "summary:\n{summary}");
}

#[test]
fn config_errors_surface_with_key_names() {
    let err = run_config_text(
        "[model]\npreset = elastic\n[numerics]\ntol = -1\n",
        Task::Spectral,
        Path::new("unused"),
    )
    .unwrap_err();
    assert!(err.to_string().contains("tol"));
    assert_eq!(err.exit_code(), 1);

    let err = parse_config("[model]\nfancy = 1\n").unwrap_err();
    assert!(err.to_string().contains("fancy"));
}

#[test]
fn binary_exit_codes_distinguish_usage_from_numerics() {
    let exe = env!("CARGO_BIN_EXE_maxkin");
    let dir = tempfile::tempdir().unwrap();

    // dt = 0 is a usage error
    let status = Command::new(exe)
        .args(["evolve", "--preset", "elastic", "--dt", "0", "--out"])
        .arg(dir.path().join("usage"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    // starving the profile solver of iterations is a numerical failure
    let status = Command::new(exe)
        .args([
            "profile",
            "--preset",
            "inelastic",
            "--e",
            "0.5",
            "--grid-size",
            "2049",
            "--max-iter",
            "2",
            "--tol",
            "1e-12",
            "--out",
        ])
        .arg(dir.path().join("numerical"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // a healthy run exits 0
    let status = Command::new(exe)
        .args([
            "spectral",
            "--preset",
            "elastic",
            "--grid-size",
            "2049",
            "--out",
        ])
        .arg(dir.path().join("ok"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join("ok/spectral.csv").exists());
}

#[test]
fn evolve_accepts_stretched_and_file_initial_data() {
    let dir = tempfile::tempdir().unwrap();
    // samples of e^{-x} as a u0 file
    let mut table = String::from("x,u\n0,1.0\n");
    let mut x = 1e-6f64;
    while x < 1e4 {
        table.push_str(&format!("{x:e},{:e}\n", (-x).exp()));
        x *= 1.6;
    }
    let path = dir.path().join("u0.csv");
    fs::write(&path, table).unwrap();
    let cfg = format!(
        "[model]\npreset = elastic\nd = 3\n[numerics]\n{FAST_NUMERICS}dt = 0.05\nt_end = 0.2\nu0 = file:{}\n",
        path.display()
    );
    run_config_text(&cfg, Task::Evolve, dir.path()).unwrap();

    let cfg = format!(
        "[model]\npreset = elastic\nd = 3\n[numerics]\n{FAST_NUMERICS}dt = 0.05\nt_end = 0.2\nu0 = exp_p:0.5\n"
    );
    let dir2 = tempfile::tempdir().unwrap();
    run_config_text(&cfg, Task::Evolve, dir2.path()).unwrap();
    let summary = read(dir2.path(), "summary.txt");
    assert!(summary.contains("final_supnorm = 1.0000000000"), "summary:\n{summary}");
}
