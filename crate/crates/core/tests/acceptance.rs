//! End-to-end acceptance run: one line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;

use fks::fracops::{FracOrder, TimeGrid};
use fks::linsolve::{build_propagators, solve_linear, IntervalForcing};
use fks::mlf::{
    evaluate, ml_asymptotic_adaptive, ml_contour, ml_series_extended, MLParams, MlConfig, SectorConfig,
};
use fks::picard::{solve_nonlinear, PicardConfig, StopReason};
use fks::spectral::{mode_symbol, Field, ModelParams, SpectralGrid};
use fks::verify::{
    check_gronwall, check_inequalities, classical_limit, default_ceilings, left_inverse_order, manufactured_residual,
    picard_envelope, reference_params, schwartz_persistence, semigroup_order, stability_uniqueness,
    yakupov_spot_check, CheckReport, Manufactured, ManufacturedCase,
};

const SEED: u64 = 20240611;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;
type Criterion = (&'static str, fn() -> Outcome);

fn summarize(reports: &[CheckReport]) -> (bool, String) {
    let ok = reports.iter().all(|r| r.passed);
    let detail = reports
        .iter()
        .map(|r| format!("{}{}={:.3e}", if r.passed { "" } else { "!" }, r.name, r.worst_margin))
        .collect::<Vec<_>>()
        .join(" ");
    (ok, detail)
}

fn grid() -> SpectralGrid {
    SpectralGrid::new(32.0, 256).expect("valid grid")
}

fn gaussian(g: &SpectralGrid, amp: f64) -> Field {
    Field::from_fn(g, |x| amp * (-x * x / 2.0).exp())
}

fn ml_accuracy() -> Outcome {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/ml_oracle.csv");
    let text = std::fs::read_to_string(path)?;
    let cfg = MlConfig::default();
    let mut worst_cut: f64 = 0.0;
    let mut worst_growth: f64 = 0.0;
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let num = |i: usize| f[i].parse::<f64>();
        let p = MLParams::new(num(1)?, num(2)?)?;
        let z = Complex64::new(num(3)?, num(4)?);
        let exact = Complex64::new(num(5)?, num(6)?);
        let got = evaluate(p, z, &cfg)?.value;
        let rel = (got - exact).norm() / exact.norm();
        let slot = if f[0] == "cut" { &mut worst_cut } else { &mut worst_growth };
        *slot = slot.max(if rel.is_nan() { f64::INFINITY } else { rel });
        rows += 1;
    }

    // Series against the asymptotic expansion on cut-sector rays, 20 <= |z| <= 80.
    // The expansion is divergent with smallest term near exp(-|z|^{1/alpha}),
    // so agreement is required where |z|^{1/alpha} >= 28 and only reported elsewhere.
    let mut worst_overlap: f64 = 0.0;
    let mut worst_outside: f64 = 0.0;
    let mut points = 0;
    for alpha in [0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5] {
        let mu = SectorConfig::default_for(alpha).mu();
        for beta in [0.5, 1.0, 1.5] {
            let p = MLParams::new(alpha, beta)?;
            for theta in [PI, 0.5 * (mu + PI), -0.5 * (mu + PI)] {
                for k in 0..=12 {
                    let r = 20.0 + 5.0 * k as f64;
                    let z = Complex64::from_polar(r, theta);
                    let s = ml_series_extended(p, z, 4000)?;
                    let a = ml_asymptotic_adaptive(p, z)?.value;
                    let rel = (s - a).norm() / s.norm();
                    if r.powf(1.0 / alpha) >= 28.0 {
                        worst_overlap = worst_overlap.max(rel);
                        points += 1;
                    } else {
                        worst_outside = worst_outside.max(rel);
                    }
                }
            }
        }
    }
    let ok = worst_cut <= 1e-10 && worst_growth <= 1e-10 && worst_overlap <= 1e-8;
    Ok((
        ok,
        format!(
            "{rows} oracle rows: cut {worst_cut:.2e}, growth {worst_growth:.2e}; \
             overlap {worst_overlap:.2e} on {points} points (truncation-limited rest {worst_outside:.1e})"
        ),
    ))
}

fn operator_identities() -> Outcome {
    Ok(summarize(&[semigroup_order(SEED, 20), left_inverse_order(SEED, 20)]))
}

fn linear_mild() -> Outcome {
    let g = SpectralGrid::new(4.0 * PI, 64)?;
    let tg = TimeGrid::new(0.0, 0.05, 20)?;
    let mut worst: f64 = 0.0;
    let (mut by_series, mut by_contour) = (0, 0);
    for beta in [0.3, 0.6, 0.9] {
        let params = ModelParams::new(FracOrder::caputo(beta)?, 1.0, 0.5, 1.0, 0.3, 0.5, 0.0, 1.0)?;
        let table = build_propagators(&params, &g, &tg)?;
        for idx in [0usize, 1, 3, 7, 12, 20] {
            let lambda = g.wavenumber(idx);
            let phi = Field::from_fn(&g, |x| (lambda * x).cos());
            let traj = solve_linear(&phi, &IntervalForcing::zero(&g, tg.n_steps), &table, &tg)?;
            let p = mode_symbol(&params, &g, idx);
            let ml = MLParams::new(beta, 1.0)?;
            for (n, t) in tg.nodes().enumerate() {
                // extended-precision series where it converges, the contour integral beyond
                let z = -p * t.powf(beta);
                let reference = if z.norm().powf(1.0 / beta) <= 100.0 {
                    by_series += 1;
                    ml_series_extended(ml, z, 4000)?
                } else {
                    by_contour += 1;
                    ml_contour(ml, z).value
                };
                let exact = phi.coeffs()[idx] * reference;
                let got = traj.fields[n].coeffs()[idx];
                worst = worst.max((got - exact).norm() / exact.norm());
            }
        }
    }
    let tg = TimeGrid::covering(0.0, 1.0, 0.1)?;
    let mut reports = Vec::new();
    for beta in [0.3, 0.7] {
        let p = reference_params(beta, 0.0, 1.0)?;
        reports.push(manufactured_residual(&Manufactured::new(ManufacturedCase::Linear), &p, &grid(), &tg));
    }
    let (ok, detail) = summarize(&reports);
    Ok((ok && worst <= 1e-9, format!("single mode {worst:.2e} ({by_series} series, {by_contour} contour refs); {detail}")))
}

fn nonlinear_solver() -> Outcome {
    let g = grid();
    let tg = TimeGrid::covering(0.0, 1.0, 0.1)?;
    let mut reports = Vec::new();
    for (beta, gamma) in [(0.3, 0.5), (0.7, 1.0)] {
        let p = reference_params(beta, gamma, 1.0)?;
        reports.push(manufactured_residual(&Manufactured::new(ManufacturedCase::Nonlinear), &p, &g, &tg));
    }
    let p = reference_params(0.5, 0.0, 1.0)?;
    let tg = TimeGrid::covering(0.0, 1.0, 1.0 / 32.0)?;
    let (_, rep) = solve_nonlinear(&gaussian(&g, 0.5), &IntervalForcing::zero(&g, tg.n_steps), &p, &g, &tg, &PicardConfig::default())?;
    let w = &rep.windows[0];
    let d2 = w.d.get(1).copied().unwrap_or(f64::INFINITY);
    let degenerate = w.iterations == 2 && d2 <= 1e-12 && rep.stop_reason == StopReason::Converged;
    let (ok, detail) = summarize(&reports);
    Ok((ok && degenerate, format!("{detail}; gamma=0 iterates {} d2 {d2:.1e}", w.iterations)))
}

fn classical() -> Outcome {
    let g = grid();
    let tg = TimeGrid::covering(0.0, 1.0, 1.0 / 32.0)?;
    let phi = gaussian(&g, 0.5);
    let mut reports = Vec::new();
    for gamma in [0.0, 1.0] {
        reports.push(classical_limit(&reference_params(1.0 - 1e-3, gamma, 1.0)?, &g, &tg, &phi)?);
    }
    let (ok, _) = summarize(&reports);
    Ok((
        ok,
        format!(
            "linear max mode {:.2e} (<= 1e-2), nonlinear {:.2e} (<= 2e-2)",
            reports[0].metadata["max_mode_discrepancy"].as_f64().unwrap_or(f64::NAN),
            reports[1].metadata["discrepancy"].as_f64().unwrap_or(f64::NAN)
        ),
    ))
}

fn lemmas() -> Outcome {
    let mut reports = check_inequalities(SEED, 200);
    reports.extend(
        check_gronwall(SEED, 40)
            .into_iter()
            .filter(|r| r.name.starts_with("gronwall")),
    );
    reports.push(yakupov_spot_check(SEED, 400));
    Ok(summarize(&reports))
}

fn envelope() -> Outcome {
    let g = grid();
    let tg = TimeGrid::covering(0.0, 1.0, 1.0 / 32.0)?;
    let mut reports = Vec::new();
    for beta in [0.4, 0.6] {
        reports.push(picard_envelope(&reference_params(beta, 1.0, 1.0)?, &g, &tg, &gaussian(&g, 0.2))?);
    }
    Ok(summarize(&reports))
}

fn uniqueness() -> Outcome {
    let g = grid();
    let tg = TimeGrid::covering(0.0, 1.0, 1.0 / 32.0)?;
    let phi = gaussian(&g, 0.5);
    let p = reference_params(0.6, 1.0, 1.0)?;
    let reports = [
        stability_uniqueness(&p, &g, &tg, &phi, 0.0)?,
        stability_uniqueness(&p, &g, &tg, &phi, 1e-6)?,
        stability_uniqueness(&reference_params(0.6, 0.0, 1.0)?, &g, &tg, &phi, 1e-6)?,
    ];
    Ok(summarize(&reports))
}

fn persistence() -> Outcome {
    let g = grid();
    let tg = TimeGrid::covering(0.0, 1.0, 1.0 / 32.0)?;
    let mut reports = Vec::new();
    for beta in [0.4, 0.8] {
        let p = reference_params(beta, 1.0, 1.0)?;
        let phi = gaussian(&g, 0.5);
        let (traj, _) =
            solve_nonlinear(&phi, &IntervalForcing::zero(&g, tg.n_steps), &p, &g, &tg, &PicardConfig::default())?;
        reports.push(schwartz_persistence(&traj, &default_ceilings(&phi, 1000.0)));
    }
    Ok(summarize(&reports))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("mittag-leffler accuracy", ml_accuracy),
        ("fractional operator orders", operator_identities),
        ("linear mild solution", linear_mild),
        ("nonlinear solver", nonlinear_solver),
        ("classical limit", classical),
        ("lemma suite", lemmas),
        ("convergence envelope", envelope),
        ("uniqueness and stability", uniqueness),
        ("schwartz persistence", persistence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {} {:<27} {} ({:.1}s) {detail}",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
