use super::*;
use crate::fracops::gamma_fn;
use crate::linsolve::{build_propagators, solve_linear, IntervalForcing};
use num_complex::Complex64;

fn solver_grid() -> SpectralGrid {
    SpectralGrid::new(32.0, 256).unwrap()
}

#[test]
fn pass_flag_follows_margin() {
    assert!(CheckReport::new("a", 1, -1e-9, 1e-8).passed);
    assert!(!CheckReport::new("a", 1, -2e-8, 1e-8).passed);
    assert!(!CheckReport::new("a", 1, f64::NAN, 1e-8).passed);
    assert!(!CheckReport::failed("a", &"boom").passed);
}

#[test]
fn worst_keeps_nan() {
    let mut w = Worst::new();
    w.push(1.0, || 1.into());
    w.push(f64::NAN, || 2.into());
    w.push(-5.0, || 3.into());
    let r = w.report("x", 0.0);
    assert!(r.worst_margin.is_nan());
    assert_eq!(r.samples, 3);
    assert!(!r.passed);
}

#[test]
fn inequality_checks_pass_and_reproduce() {
    let a = check_inequalities(7, 20);
    let b = check_inequalities(7, 20);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    for r in &a {
        assert!(r.passed, "{r:?}");
    }
}

#[test]
fn power_rule_margin_is_nonnegative() {
    let r = &check_inequalities(0, 1)[1];
    assert_eq!(r.name, "alikhanov_power_rule");
    assert!(r.worst_margin >= -1e-12, "{r:?}");
}

#[test]
fn half_order_exponential_saturates() {
    // E_{1/2}(1) = e (1 + erf 1)
    let (y, bound) = gronwall::continuous_case(0.5, 1.0, 1.0, &[], 1.0).unwrap();
    assert!((y - 5.008_980_080_762_283).abs() < 1e-13);
    assert!((bound - y).abs() <= 1e-12 * y);
}

#[test]
fn gronwall_checks_pass() {
    for r in check_gronwall(3, 20) {
        assert!(r.passed, "{r:?}");
    }
}

#[test]
fn sequence_example_bound() {
    let r = check_gronwall(0, 1).into_iter().find(|r| r.name == "gronwall_sequence_exact").unwrap();
    let want: f64 = (0..3).map(|i| 1.0 / gamma_fn(i as f64 / 2.0 + 1.0).unwrap()).sum::<f64>() + 1.0 / gamma_fn(2.5).unwrap();
    let got = r.metadata["example_bound_t1"].as_f64().unwrap();
    assert!((got - want).abs() < 1e-14);
}

#[test]
fn yakupov_fit_validates() {
    let r = yakupov_spot_check(20240611, 400);
    assert!(r.passed, "{r:?}");
}

#[test]
fn trivial_manufactured_is_exact() {
    let p = reference_params(0.5, 0.5, 1.0).unwrap();
    let m = Manufactured { amplitude: 0.0, ..Manufactured::new(ManufacturedCase::Nonlinear) };
    let tg = TimeGrid::new(0.0, 0.25, 4).unwrap();
    let r = manufactured_residual(&m, &p, &solver_grid(), &tg);
    assert!(r.passed);
    assert_eq!(r.metadata["final_error"], 0.0);
}

#[test]
fn manufactured_linear_order() {
    let p = reference_params(0.5, 0.0, 1.0).unwrap();
    let tg = TimeGrid::new(0.0, 0.1, 10).unwrap();
    let r = manufactured_residual(&Manufactured::new(ManufacturedCase::Linear), &p, &solver_grid(), &tg);
    assert!(r.passed, "{r:?}");
}

#[test]
fn mode_discrepancy_shrinks_with_epsilon() {
    let p = Complex64::new(1.0, 0.5);
    let d: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&e| classical_mode_discrepancy(FracOrder::new(1.0 - e).unwrap(), p, 1.0).unwrap())
        .collect();
    let c = d[0] / 1e-2;
    assert!(d[1] < d[0] && d[2] < d[1], "{d:?}");
    assert!(d[1] <= 1.5 * c * 1e-3 && d[2] <= 1.5 * c * 1e-4, "{d:?}");
}

#[test]
fn oracle_is_exact_without_nonlinearity() {
    let p = reference_params(1.0, 0.0, 1.0).unwrap();
    let g = SpectralGrid::new(8.0, 32).unwrap();
    let phi = Field::from_fn(&g, |x| (-x * x).exp());
    let tg = TimeGrid::new(0.0, 0.1, 5).unwrap();
    let out = classical_oracle(&p, &phi, &tg, 3).unwrap();
    let zero = classical_oracle(&p, &Field::zeros(&g), &tg, 3).unwrap();
    assert!(zero.iter().all(|f| f.max_abs() == 0.0));
    for idx in 0..32 {
        let want = phi.coeffs()[idx] * (-crate::spectral::mode_symbol(&p, &g, idx) * 0.5).exp();
        assert!((out[5].coeffs()[idx] - want).norm() < 1e-14);
    }
}

#[test]
fn oracle_reports_large_steps() {
    let p = reference_params(1.0, 1.0, 1.0).unwrap();
    let g = SpectralGrid::new(8.0, 64).unwrap();
    let phi = Field::from_fn(&g, |x| 10.0 * (-x * x).exp());
    let tg = TimeGrid::new(0.0, 1.0, 1).unwrap();
    assert!(matches!(classical_oracle(&p, &phi, &tg, 1), Err(VerifyError::OracleUnstable { .. })));
}

#[test]
fn classical_limit_rejects_far_orders() {
    let p = reference_params(0.5, 0.0, 1.0).unwrap();
    let g = solver_grid();
    let tg = TimeGrid::new(0.0, 0.1, 10).unwrap();
    assert!(matches!(classical_limit(&p, &g, &tg, &Field::zeros(&g)), Err(VerifyError::Setup(_))));
}

#[test]
fn classical_limit_of_zero_data() {
    let p = reference_params(1.0 - 1e-3, 1.0, 1.0).unwrap();
    let g = solver_grid();
    let tg = TimeGrid::new(0.0, 0.1, 10).unwrap();
    let r = classical_limit(&p, &g, &tg, &Field::zeros(&g)).unwrap();
    assert_eq!(r.metadata["discrepancy"], 0.0);
}

#[test]
fn twin_runs_are_identical() {
    let p = reference_params(0.5, 1.0, 1.0).unwrap();
    let g = solver_grid();
    let tg = TimeGrid::new(0.0, 1.0 / 16.0, 16).unwrap();
    let phi = Field::from_fn(&g, |x| 0.5 * (-x * x / 2.0).exp());
    let r = stability_uniqueness(&p, &g, &tg, &phi, 0.0).unwrap();
    assert!(r.passed && r.metadata["byte_identical"] == true);
}

#[test]
fn perturbation_stays_under_growth_bound() {
    let p = reference_params(0.5, 1.0, 1.0).unwrap();
    let g = solver_grid();
    let tg = TimeGrid::new(0.0, 1.0 / 16.0, 16).unwrap();
    let phi = Field::from_fn(&g, |x| 0.5 * (-x * x / 2.0).exp());
    let r = stability_uniqueness(&p, &g, &tg, &phi, 1e-6).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(r.metadata["c_hat"].as_f64().unwrap() > 0.0);
}

#[test]
fn persistence_detects_low_ceilings() {
    let p = reference_params(0.5, 0.0, 1.0).unwrap();
    let g = solver_grid();
    let tg = TimeGrid::new(0.0, 0.25, 4).unwrap();
    let phi = Field::from_fn(&g, |x| (-x * x).exp());
    let table = build_propagators(&p, &g, &tg).unwrap();
    let traj = solve_linear(&phi, &IntervalForcing::zero(&g, 4), &table, &tg).unwrap();
    let ok = schwartz_persistence(&traj, &default_ceilings(&phi, 1000.0));
    assert!(ok.passed, "{ok:?}");
    assert!(!schwartz_persistence(&traj, &default_ceilings(&phi, 0.5)).passed);
}

#[test]
fn report_file_is_a_json_array() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let reports = vec![CheckReport::new("a", 2, 0.5, 0.0).with("seed", 1), CheckReport::failed("b", &"no")];
    write_report(&path, &reports).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    assert_eq!(arr[0]["passed"], true);
    assert_eq!(arr[1]["passed"], false);
    assert!(arr[1]["worst_margin"].is_null());
}
