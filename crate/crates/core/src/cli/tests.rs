use std::fs;

use proptest::prelude::*;

use super::*;
use crate::fracops::{FracOrder, TimeGrid};
use crate::picard::WindowMode;
use crate::spectral::{write_snapshot, Field, ModelParams, SpectralGrid};
use crate::verify::{manufactured_residual, Manufactured, ManufacturedCase};

const BASE: &str = "\
# reference model
model.beta = 0.6
model.a = 1
model.b = 0.5
model.c = 1
model.d = 0.3
model.k = 0.5
grid.L = 32
grid.N = 256
time.dt = 0.1
time.T = 1
";

fn with_dir(text: &str, dir: &Path) -> String {
    format!("{text}output.dir = {}\n", dir.display())
}

#[test]
fn defaults_fill_unset_keys() {
    let cfg = parse_config(&format!("{BASE}ic.kind = gaussian\n")).unwrap();
    assert_eq!(cfg.gamma, 0.0);
    assert_eq!(cfg.forcing, ForcingSpec::Zero);
    assert_eq!(cfg.ic, Some(InitialCondition::Gaussian { amplitude: 1.0, width: 1.0, center: 0.0 }));
    assert_eq!(cfg.picard, crate::picard::PicardConfig::default());
    assert_eq!(cfg.output.snapshots, vec![1.0]);
    assert_eq!(cfg.output.seminorms, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
    assert!(cfg.fast_linear);
}

#[test]
fn emit_then_parse_is_identity() {
    let texts = [
        format!("{BASE}ic.kind = cosine_packet\nic.wavenumber = 2.5\npicard.window_mode = fixed\npicard.window = 0.25\n"),
        format!("{BASE}model.gamma = 1\nforcing.kind = manufactured\npicard.k_hat = 3\npicard.a_hat = 0.125\n"),
        format!("{BASE}ic.kind = file\nic.path = /tmp/phi.csv\nforcing.kind = file\nforcing.path = f.csv\noutput.snapshots = 0, 0.5, 1\noutput.sup_pairs = 2:0\nrun.fast_linear = false\n"),
    ];
    for t in &texts {
        let cfg = parse_config(t).unwrap();
        let again = parse_config(&cfg.emit()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.emit(), again.emit());
    }
}

#[test]
fn unknown_key_reports_its_line() {
    let err = parse_config(&format!("{BASE}ic.kind = gaussian\nmodel.alpha = 3\n")).unwrap_err();
    assert_eq!(err, ConfigError::UnknownKey { line: 13, key: "model.alpha".into() });
}

#[test]
fn syntax_and_value_errors_carry_lines() {
    let err = parse_config("model.beta = 0.5\nthis line is wrong\n").unwrap_err();
    assert!(matches!(err, ConfigError::Syntax { line: 2, .. }), "{err}");
    let err = parse_config("model.beta = half\n").unwrap_err();
    assert!(matches!(err, ConfigError::Value { line: 1, .. }), "{err}");
    let err = parse_config("model.beta = 0.5\nmodel.beta = 0.6\n").unwrap_err();
    assert!(matches!(err, ConfigError::Duplicate { line: 2, .. }), "{err}");
}

#[test]
fn invariants_are_named() {
    let cases = [
        ("grid.N = 256", "grid.N = 255", "N even"),
        ("grid.N = 256", "grid.N = 6", "N >= 8"),
        ("model.beta = 0.6", "model.beta = 1.5", "0 < beta < 1"),
        ("model.a = 1", "model.a = -1", "a > 0"),
        ("time.T = 1", "time.T = 0.05", "T >= dt"),
    ];
    for (from, to, needle) in cases {
        let text = format!("{BASE}ic.kind = gaussian\n").replace(from, to);
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(ref m) if m.contains(needle)), "{to}: {err}");
    }
    let err = parse_config("model.beta = 0.5\n").unwrap_err();
    assert_eq!(err, ConfigError::Missing("model.a"));
}

#[test]
fn kind_specific_keys_are_checked() {
    let err = parse_config(&format!("{BASE}ic.kind = gaussian\nic.wavenumber = 2\n")).unwrap_err();
    assert!(matches!(err, ConfigError::Value { line: 13, .. }), "{err}");
    let err = parse_config(&format!("{BASE}forcing.kind = manufactured\nforcing.case = linear\nmodel.gamma = 1\n")).unwrap_err();
    assert!(matches!(err, ConfigError::Invalid(_)), "{err}");
    let err = parse_config(&format!("{BASE}ic.kind = gaussian\npicard.window = 0.5\n")).unwrap_err();
    assert!(matches!(err, ConfigError::Value { .. }), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn numeric_round_trip(
        beta in 0.01f64..0.99,
        a in 1e-3f64..10.0,
        b in -5.0f64..5.0,
        gamma in -2.0f64..2.0,
        half in 1.0f64..100.0,
        n in 4usize..200,
        dt in 1e-4f64..0.5,
        amp in -3.0f64..3.0,
        tol in 1e-14f64..1e-6,
        window in 0.01f64..2.0,
    ) {
        let text = format!(
            "model.beta = {beta}\nmodel.a = {a}\nmodel.b = {b}\nmodel.gamma = {gamma}\ngrid.L = {half}\n\
             grid.N = {}\ntime.dt = {dt}\ntime.T = {}\nic.kind = gaussian\nic.amplitude = {amp}\n\
             picard.tol = {tol}\npicard.window_mode = fixed\npicard.window = {window}\n",
            2 * n, dt * 3.0
        );
        let cfg = parse_config(&text).unwrap();
        prop_assert_eq!(cfg.picard.window_mode, WindowMode::Fixed(window));
        prop_assert_eq!(parse_config(&cfg.emit()).unwrap(), cfg);
    }
}

#[test]
fn sig17_formatting() {
    assert_eq!(format_sig17(std::f64::consts::E), "2.7182818284590451");
    assert_eq!(format_sig17(0.125), "0.12500000000000000");
    assert_eq!(format_sig17(1e-7), "9.9999999999999995e-8");
    assert_eq!(format_sig17(-2.5e20), "-2.5000000000000000e20");
    assert_eq!(format_sig17(0.0), "0");
}

#[test]
fn mlf_prints_real_and_complex() {
    assert_eq!(mlf_line(1.0, 1.0, Complex64::new(1.0, 0.0)).unwrap(), "2.7182818284590451");
    let line = mlf_line(0.5, 0.5, Complex64::new(0.0, 0.0)).unwrap();
    assert!(line.starts_with("0.564189583547756"), "{line}");
    let line = mlf_line(1.0, 1.0, Complex64::new(0.0, 1.0)).unwrap();
    let parts: Vec<f64> = line.split(' ').map(|s| s.parse().unwrap()).collect();
    assert!((parts[0] - 1f64.cos()).abs() < 1e-14 && (parts[1] - 1f64.sin()).abs() < 1e-14, "{line}");
    assert_eq!(mlf_line(2.5, 1.0, Complex64::new(0.0, 0.0)).unwrap_err().exit_code(), EXIT_USAGE);
}

fn manufactured_linear_text(dir: &Path) -> String {
    with_dir(&format!("{BASE}forcing.kind = manufactured\nforcing.case = linear\noutput.snapshots = 0,0.5,1\n"), dir)
}

#[test]
fn solve_writes_listed_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config(&manufactured_linear_text(tmp.path())).unwrap();
    let m = run_solve(&cfg).unwrap();
    assert_eq!(m.status, "ok");
    assert!(!m.partial);
    let names: Vec<&str> = m.files.iter().map(|f| f.name.as_str()).collect();
    for want in ["config.resolved", "norms.csv", "snapshot_t0.csv", "snapshot_t0.5.csv", "snapshot_t1.csv", "convergence.json"] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
    for f in &m.files {
        assert_eq!(fs::metadata(tmp.path().join(&f.name)).unwrap().len(), f.bytes, "{}", f.name);
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["grid.N"], "256");
    assert_eq!(manifest["files"].as_array().unwrap().len(), m.files.len());
    let norms = fs::read_to_string(tmp.path().join("norms.csv")).unwrap();
    assert_eq!(norms.lines().count(), 1 + 11);
    assert!(norms.starts_with("t,l2,norm2_pair,seminorm_0_0,"));
    let resolved = fs::read_to_string(tmp.path().join("config.resolved")).unwrap();
    assert_eq!(parse_config(&resolved).unwrap(), cfg);
}

#[test]
fn manufactured_error_matches_library_check() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config(&manufactured_linear_text(tmp.path())).unwrap();
    let m = run_solve(&cfg).unwrap();
    let params = ModelParams::new(FracOrder::caputo(0.6).unwrap(), 1.0, 0.5, 1.0, 0.3, 0.5, 0.0, 1.0).unwrap();
    let grid = SpectralGrid::new(32.0, 256).unwrap();
    let tg = TimeGrid::new(0.0, 0.1, 10).unwrap();
    let report = manufactured_residual(&Manufactured::new(ManufacturedCase::Linear), &params, &grid, &tg);
    let lib = report.metadata["final_error"].as_f64().unwrap();
    assert_eq!(m.final_error.unwrap(), lib);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let text = format!("{BASE}model.gamma = 1\nic.kind = gaussian\nic.amplitude = 0.3\nrun.fast_linear = false\n");
    for d in [a.path(), b.path()] {
        run_solve(&parse_config(&with_dir(&text, d)).unwrap()).unwrap();
    }
    for name in ["norms.csv", "snapshot_t1.csv", "convergence.json"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn file_inputs_reproduce_built_in_ones() {
    let tmp = tempfile::tempdir().unwrap();
    let grid = SpectralGrid::new(32.0, 256).unwrap();
    let phi = Field::from_fn(&grid, |x| (-x * x).exp());
    let ic_path = tmp.path().join("phi.csv");
    write_snapshot(&ic_path, &phi).unwrap();
    let f_path = tmp.path().join("forcing.csv");
    let row = |t: f64| {
        let vals: Vec<String> = grid.nodes().iter().map(|x| format!("{:?}", t * (-x * x).exp())).collect();
        format!("{t},{}\n", vals.join(","))
    };
    fs::write(&f_path, format!("t,f\n{}{}", row(0.0), row(1.0))).unwrap();
    let text = format!(
        "{BASE}ic.kind = file\nic.path = {}\nforcing.kind = file\nforcing.path = {}\n",
        ic_path.display(),
        f_path.display()
    );
    let from_files = solve_config(&parse_config(&text).unwrap()).unwrap();
    let built = {
        let params = ModelParams::new(FracOrder::caputo(0.6).unwrap(), 1.0, 0.5, 1.0, 0.3, 0.5, 0.0, 1.0).unwrap();
        let tg = TimeGrid::new(0.0, 0.1, 10).unwrap();
        let g0 = Field::from_fn(&grid, |x| (-x * x).exp());
        let f = crate::linsolve::IntervalForcing::from_midpoints(&grid, &tg, |t| g0.scaled(t)).unwrap();
        let table = crate::linsolve::build_propagators(&params, &grid, &tg).unwrap();
        crate::linsolve::solve_linear(&phi, &f, &table, &tg).unwrap()
    };
    let gap = run::relative_gap(from_files.trajectory.last(), built.last());
    assert!(gap < 1e-13, "gap {gap}");
}

#[test]
fn watchdog_exit_and_partial_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let text = with_dir(&format!("{BASE}ic.kind = gaussian\nic.width = 20\n"), tmp.path());
    let err = run_solve(&parse_config(&text).unwrap()).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_WATCHDOG);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["partial"], true);
    assert_eq!(manifest["status"], "watchdog");
}

#[test]
fn divergence_exit_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let text = with_dir(
        &format!("{BASE}model.gamma = 1\nic.kind = gaussian\nic.amplitude = 40\npicard.max_iter = 40\n").replace("time.T = 1", "time.T = 2"),
        tmp.path(),
    );
    let err = run_solve(&parse_config(&text).unwrap()).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_DIVERGED, "{err}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("convergence.json")).unwrap()).unwrap();
    assert_eq!(report["stop_reason"], "diverged");
}

#[test]
fn exit_codes_from_arguments() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(main_with_args(["fks", "mlf", "0.5", "1", "-2"]), EXIT_OK);
    assert_eq!(main_with_args(["fks", "bogus"]), EXIT_USAGE);
    assert_eq!(main_with_args(["fks", "mlf", "x", "1", "1"]), EXIT_USAGE);
    let missing = tmp.path().join("nope.cfg");
    assert_eq!(main_with_args(["fks".into(), "solve".into(), missing.into_os_string()]), EXIT_IO);
    let bad = tmp.path().join("bad.cfg");
    fs::write(&bad, "model.beta = 2\n").unwrap();
    assert_eq!(main_with_args(["fks".into(), "solve".into(), bad.into_os_string()]), EXIT_USAGE);
}

#[test]
fn refine_reports_orders() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config(&manufactured_linear_text(tmp.path())).unwrap();
    let rep = refine(&cfg).unwrap();
    assert_eq!(rep.measure, "manufactured_error");
    assert_eq!(rep.orders.len(), 2);
    assert!(rep.orders.iter().all(|&o| o > 1.0), "{:?}", rep.orders);
}
