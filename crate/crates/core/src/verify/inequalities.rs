use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde_json::json;

use super::{random_smooth_field, random_time_fn, rng_for, CheckReport, Worst};
use crate::fracops::{caputo_derivative, recip_gamma, FracOrder, TimeGrid, TimeSeries};
use crate::mlf::{mittag_leffler, MLParams, SectorConfig};
use crate::spectral::{l2_norm2, spectral_derivative, weighted_l2, weighted_sup, Field, SpectralGrid};

const BETAS: [f64; 3] = [0.25, 0.5, 0.75];
const STEPS: usize = 256;

/// Alikhanov inequality, the power-rule case, the ML decay bound and the
/// weighted-sup chain.
pub fn check_inequalities(seed: u64, n_samples: usize) -> Vec<CheckReport> {
    vec![alikhanov_random(seed, n_samples), alikhanov_power_rule(), ml_decay(seed, n_samples), weighted_sup_chain(seed, n_samples)]
}

fn alikhanov_margins(v: &TimeSeries<f64>, order: FracOrder) -> Vec<f64> {
    let dv = caputo_derivative(v, order).expect("order below one and grid has steps");
    let dv2 = caputo_derivative(&v.map(|x| x * x), order).expect("same grid");
    v.values().iter().zip(dv.values()).zip(dv2.values()).map(|((x, d), d2)| x * d - 0.5 * d2).collect()
}

fn alikhanov_random(seed: u64, n_samples: usize) -> CheckReport {
    let tg = TimeGrid::new(0.0, 1.0 / STEPS as f64, STEPS).expect("valid grid");
    let mut rng = rng_for(seed, 1);
    let mut worst = Worst::new();
    for &beta in &BETAS {
        let order = FracOrder::caputo(beta).expect("beta in (0, 1)");
        for s in 0..n_samples {
            let v = TimeSeries::sample(tg, random_time_fn(&mut rng));
            for (j, m) in alikhanov_margins(&v, order).into_iter().enumerate().skip(1) {
                worst.push(m, || json!({ "beta": beta, "sample": s, "node": j }));
            }
        }
    }
    worst.report("alikhanov_random", 1e-8).with("dt", 1.0 / STEPS as f64).with("betas", BETAS.to_vec())
}

/// v = t against the power rule, and v = const where both sides vanish.
fn alikhanov_power_rule() -> CheckReport {
    let tg = TimeGrid::new(0.0, 1.0 / STEPS as f64, STEPS).expect("valid grid");
    let mut worst = Worst::new();
    let mut gap: f64 = 0.0;
    for &beta in &BETAS {
        let order = FracOrder::caputo(beta).expect("beta in (0, 1)");
        let lin = TimeSeries::sample(tg, |t| t);
        let discrete = alikhanov_margins(&lin, order);
        for (j, t) in tg.nodes().enumerate().skip(1) {
            let exact = t * t.powf(1.0 - beta) * recip_gamma(2.0 - beta) - t.powf(2.0 - beta) * recip_gamma(3.0 - beta);
            worst.push(exact, || json!({ "beta": beta, "node": j, "kind": "analytic" }));
            worst.push(discrete[j], || json!({ "beta": beta, "node": j, "kind": "l1" }));
            gap = gap.max((discrete[j] - exact).abs());
        }
        let constant = TimeSeries::sample(tg, |_| 0.7);
        for (j, m) in alikhanov_margins(&constant, order).into_iter().enumerate() {
            worst.push(-m.abs(), || json!({ "beta": beta, "node": j, "kind": "constant" }));
        }
    }
    worst.report("alikhanov_power_rule", 1e-8).with("max_l1_gap", gap)
}

/// (1 + |z|) |E_{alpha,beta}(z)| on random rays of the cut sector: the bound
/// constant is fitted for |z| <= 100 and must hold out to |z| = 1e6.
fn ml_decay(seed: u64, n_samples: usize) -> CheckReport {
    let mut rng = rng_for(seed, 2);
    let radii: Vec<f64> = (0..=70).map(|k| 10f64.powf(-1.0 + 0.1 * k as f64)).collect();
    let mut worst = Worst::new();
    let mut failures = 0usize;
    let mut c_max: f64 = 0.0;
    for s in 0..n_samples {
        let alpha = rng.gen_range(0.25..0.95);
        let beta = rng.gen_range(0.3..2.0);
        let mu = SectorConfig::default_for(alpha).mu();
        let theta = rng.gen_range(mu..=PI) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let p = MLParams::new(alpha, beta).expect("positive parameters");
        let vals: Result<Vec<f64>, _> = radii
            .iter()
            .map(|&r| mittag_leffler(p, Complex64::from_polar(r, theta)).map(|e| (1.0 + r) * e.norm()))
            .collect();
        let ctx = || json!({ "sample": s, "alpha": alpha, "beta": beta, "theta": theta });
        match vals {
            Err(_) => {
                failures += 1;
                worst.push(f64::NEG_INFINITY, ctx);
            }
            Ok(v) => {
                let split = radii.iter().position(|&r| r > 100.0 * (1.0 + 1e-12)).expect("radii extend past 100");
                let c = 1.1 * v[..split].iter().cloned().fold(0.0, f64::max);
                c_max = c_max.max(c);
                for (&r, &x) in radii[split..].iter().zip(&v[split..]) {
                    worst.push((c - x) / c, || json!({ "sample": s, "alpha": alpha, "beta": beta, "theta": theta, "r": r }));
                }
            }
        }
    }
    worst.report("ml_decay_bound", 0.0).with("evaluation_failures", failures).with("largest_fitted_c", c_max)
}

/// sup|x^s d^m u|^2 <= 2s A + sqrt(A B) with A, B the (1+x^2)^s-weighted
/// squares of d^m u and d^{m+1} u.
fn weighted_sup_chain(seed: u64, n_samples: usize) -> CheckReport {
    let grid = SpectralGrid::new(20.0, 512).expect("valid grid");
    let mut rng = rng_for(seed, 3);
    let mut worst = Worst::new();
    for s_idx in 0..n_samples {
        let u = random_smooth_field(&grid, &mut rng);
        worst.merge(chain_margins(&u, 3, |m, s| json!({ "sample": s_idx, "m": m, "s": s })));
    }
    worst.report("weighted_sup_chain", 1e-8).with("half_length", 20.0).with("n_points", 512)
}

/// Relative chain margins for 0 <= m, s <= max_order.
pub(super) fn chain_margins(u: &Field, max_order: u32, ctx: impl Fn(u32, u32) -> serde_json::Value) -> Worst {
    let mut derivs = vec![u.clone()];
    for m in 1..=max_order + 1 {
        derivs.push(spectral_derivative(u, m));
    }
    let mut worst = Worst::new();
    for m in 0..=max_order {
        for s in 0..=max_order {
            let a = weighted_l2(&derivs[m as usize], s);
            let b = weighted_l2(&derivs[m as usize + 1], s);
            let sup = weighted_sup(u, s, m);
            let rhs = 2.0 * s as f64 * a + (a * b).sqrt();
            let margin = if rhs > 0.0 { (rhs - sup * sup) / rhs } else { -sup * sup };
            worst.push(margin, || ctx(m, s));
        }
    }
    worst
}

/// Spot check of the epsilon form: int x^{2m} (d^k u)^2 <= M_eps + eps int x^{2m+2} u^2
/// over fields normalised to int (d^4 u)^2 = 1. M_eps is fitted on the first
/// half of the samples and validated, doubled, on the second half.
pub fn yakupov_spot_check(seed: u64, n_samples: usize) -> CheckReport {
    let grid = SpectralGrid::new(20.0, 512).expect("valid grid");
    let mut rng = rng_for(seed, 4);
    let fields: Vec<Field> = (0..n_samples.max(2))
        .map(|_| {
            let u = random_smooth_field(&grid, &mut rng);
            let norm = l2_norm2(&spectral_derivative(&u, 4)).sqrt();
            u.scaled(1.0 / norm)
        })
        .collect();
    let x = grid.nodes();
    let moment = |f: &Field, p: i32| grid.spacing() * f.samples().iter().zip(&x).map(|(v, x)| x.powi(p) * v * v).sum::<f64>();
    let half = fields.len() / 2;
    let mut worst = Worst::new();
    let mut fitted = Vec::new();
    for &(k, m) in &[(1u32, 1i32), (1, 2), (2, 1)] {
        let stats: Vec<(f64, f64)> = fields
            .iter()
            .map(|u| (moment(&spectral_derivative(u, k), 2 * m), moment(u, 2 * m + 2)))
            .collect();
        for &eps in &[1.0, 0.1, 0.01] {
            let m_eps = stats[..half].iter().map(|(lhs, w)| lhs - eps * w).fold(0.0, f64::max);
            fitted.push(json!({ "k": k, "m": m, "eps": eps, "m_eps": m_eps }));
            for (i, (lhs, w)) in stats[half..].iter().enumerate() {
                let rhs = 2.0 * m_eps + eps * w;
                worst.push((rhs - lhs) / rhs, || json!({ "k": k, "m": m, "eps": eps, "sample": half + i }));
            }
        }
    }
    worst.report("yakupov_eps_form", 0.0).with("fitted", fitted)
}
