use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::{random_time_fn, rng_for, CheckReport, Worst};
use crate::fracops::{caputo_derivative, gamma_fn, rl_integral, FracOrder, TimeGrid, TimeSeries};
use crate::mlf::{mittag_leffler, ml_series_extended, MLParams, MlError};

/// Continuous and sequence Gronwall bounds plus the order checks of the
/// semigroup and left-inverse identities.
pub fn check_gronwall(seed: u64, n_samples: usize) -> Vec<CheckReport> {
    let order_samples = n_samples.clamp(1, 50);
    vec![
        gronwall_continuous(seed, n_samples),
        gronwall_saturating(seed, n_samples),
        sequence_exact(seed, n_samples),
        sequence_numeric(seed, n_samples.clamp(1, 50)),
        semigroup_order(seed, order_samples),
        left_inverse_order(seed, order_samples),
    ]
}

fn ml_real(alpha: f64, beta: f64, x: f64) -> Result<f64, MlError> {
    Ok(mittag_leffler(MLParams::new(alpha, beta)?, Complex64::new(x, 0.0))?.re)
}

fn ml_reference(alpha: f64, beta: f64, x: f64) -> Result<f64, MlError> {
    Ok(ml_series_extended(MLParams::new(alpha, beta)?, Complex64::new(x, 0.0), 4000)?.re)
}

fn factorial(p: usize) -> f64 {
    (1..=p).map(|k| k as f64).product()
}

/// Exact solution of d^beta y = c1 y + sum_p q_p t^p, y(0) = y0, and the
/// Gronwall right-hand side, both at time t.
pub(super) fn continuous_case(beta: f64, c1: f64, y0: f64, q: &[f64], t: f64) -> Result<(f64, f64), MlError> {
    let z = c1 * t.powf(beta);
    let mut y = y0 * ml_reference(beta, 1.0, z)?;
    let mut i_c2 = 0.0;
    for (p, &qp) in q.iter().enumerate() {
        if qp == 0.0 {
            continue;
        }
        let pf = p as f64;
        y += qp * factorial(p) * t.powf(beta + pf) * ml_reference(beta, beta + pf + 1.0, z)?;
        i_c2 += qp * factorial(p) / gamma_fn(pf + 1.0 + beta).expect("positive argument") * t.powf(pf + beta);
    }
    let bound = y0 * ml_real(beta, 1.0, z)? + gamma_fn(beta).expect("positive") * ml_real(beta, beta, z)? * i_c2;
    Ok((y, bound))
}

const GRONWALL_NODES: usize = 32;

#[derive(Debug, Clone)]
struct ContinuousCase {
    beta: f64,
    c1: f64,
    y0: f64,
    q: Vec<f64>,
}

/// Margins of all cases, evaluated in parallel and folded in sample order.
fn continuous_margins(cases: &[ContinuousCase], margin: impl Fn(f64, f64) -> f64 + Sync) -> Worst {
    let per_case: Vec<Worst> = cases
        .par_iter()
        .enumerate()
        .map(|(s, c)| {
            let mut worst = Worst::new();
            for j in 1..=GRONWALL_NODES {
                let t = j as f64 / GRONWALL_NODES as f64;
                let ctx = || json!({ "sample": s, "beta": c.beta, "c1": c.c1, "y0": c.y0, "q": c.q, "t": t });
                match continuous_case(c.beta, c.c1, c.y0, &c.q, t) {
                    Ok((y, bound)) => worst.push(margin(y, bound), ctx),
                    Err(_) => worst.push(f64::NEG_INFINITY, ctx),
                }
            }
            worst
        })
        .collect();
    let mut worst = Worst::new();
    for w in per_case {
        worst.merge(w);
    }
    worst
}

fn gronwall_continuous(seed: u64, n_samples: usize) -> CheckReport {
    let mut rng = rng_for(seed, 10);
    let cases: Vec<ContinuousCase> = (0..n_samples)
        .map(|_| ContinuousCase {
            beta: rng.gen_range(0.2..0.95),
            c1: rng.gen_range(0.1..3.0),
            y0: rng.gen_range(0.0..2.0),
            q: (0..3).map(|_| rng.gen_range(0.0..1.0)).collect(),
        })
        .collect();
    continuous_margins(&cases, |y, bound| (bound - y) / bound.max(f64::MIN_POSITIVE)).report("gronwall_continuous", 1e-8)
}

/// With c2 = 0 the bound is attained: y(0) E_beta(c1 t^beta) both ways.
fn gronwall_saturating(seed: u64, n_samples: usize) -> CheckReport {
    let mut rng = rng_for(seed, 11);
    let mut cases = vec![ContinuousCase { beta: 0.5, c1: 1.0, y0: 1.0, q: Vec::new() }];
    cases.extend((0..n_samples).map(|_| ContinuousCase {
        beta: rng.gen_range(0.2..0.95),
        c1: rng.gen_range(0.1..3.0),
        y0: rng.gen_range(0.1..2.0),
        q: Vec::new(),
    }));
    continuous_margins(&cases, |y, bound| -(bound - y).abs() / bound).report("gronwall_saturating", 1e-6)
}

/// Sum of c t^e terms.
type Poly = Vec<(f64, f64)>;

fn rl_poly(p: &Poly, beta: f64) -> Poly {
    p.iter()
        .map(|&(c, e)| (c * gamma_fn(e + 1.0).expect("e >= 0") / gamma_fn(e + 1.0 + beta).expect("e >= 0"), e + beta))
        .collect()
}

fn eval_poly(p: &Poly, t: f64) -> f64 {
    p.iter().map(|&(c, e)| if e == 0.0 { c } else { c * t.powf(e) }).sum()
}

#[derive(Debug, Clone)]
struct SequenceCase {
    a: f64,
    b: f64,
    beta: f64,
    n: usize,
    g0: Poly,
}

impl SequenceCase {
    fn random(rng: &mut rand_chacha::ChaCha8Rng) -> Self {
        Self {
            a: rng.gen_range(0.0..2.0),
            b: rng.gen_range(0.0..2.0),
            beta: rng.gen_range(0.2..0.95),
            n: rng.gen_range(1..=6),
            g0: (0..3).map(|p| (rng.gen_range(0.0..1.0), p as f64)).collect(),
        }
    }

    /// a sum_{i<n} b^i t^{i beta} / Gamma(i beta + 1) + b^n I^{n beta} g0.
    fn bound(&self, t: f64) -> f64 {
        let head: f64 = (0..self.n)
            .map(|i| {
                let e = i as f64 * self.beta;
                self.a * self.b.powi(i as i32) * t.powf(e) / gamma_fn(e + 1.0).expect("positive")
            })
            .sum();
        let nb = self.n as f64 * self.beta;
        let tail: f64 = self
            .g0
            .iter()
            .map(|&(c, e)| c * gamma_fn(e + 1.0).expect("positive") / gamma_fn(e + 1.0 + nb).expect("positive") * t.powf(e + nb))
            .sum();
        head + self.b.powi(self.n as i32) * tail
    }

    /// g_n from g_i = a + b I^beta g_{i-1}, in closed form term by term.
    fn recursion(&self) -> Poly {
        let mut g = self.g0.clone();
        for _ in 0..self.n {
            let mut next = vec![(self.a, 0.0)];
            next.extend(rl_poly(&g, self.beta).into_iter().map(|(c, e)| (self.b * c, e)));
            g = next;
        }
        g
    }
}

fn sequence_cases(seed: u64, n_samples: usize) -> Vec<SequenceCase> {
    let mut rng = rng_for(seed, 12);
    let mut cases = vec![
        SequenceCase { a: 1.0, b: 1.0, beta: 0.5, n: 3, g0: vec![(1.0, 0.0)] },
        SequenceCase { a: 0.0, b: 1.0, beta: 0.5, n: 3, g0: vec![(0.0, 0.0)] },
    ];
    cases.extend((0..n_samples).map(|_| SequenceCase::random(&mut rng)));
    cases
}

/// The saturating recursion reproduces the bound exactly.
fn sequence_exact(seed: u64, n_samples: usize) -> CheckReport {
    let cases = sequence_cases(seed, n_samples);
    let mut worst = Worst::new();
    for (s, case) in cases.iter().enumerate() {
        let g = case.recursion();
        for j in 1..=GRONWALL_NODES {
            let t = j as f64 / GRONWALL_NODES as f64;
            let bound = case.bound(t);
            let gap = (eval_poly(&g, t) - bound).abs() / bound.max(f64::MIN_POSITIVE);
            worst.push(-gap, || json!({ "sample": s, "t": t, "n": case.n, "beta": case.beta }));
        }
    }
    let first = &cases[0];
    worst.report("gronwall_sequence_exact", 1e-6).with("example_bound_t1", first.bound(1.0))
}

fn numeric_recursion(case: &SequenceCase, steps: usize) -> Vec<f64> {
    let tg = TimeGrid::new(0.0, 1.0 / steps as f64, steps).expect("valid grid");
    let order = FracOrder::new(case.beta).expect("beta in (0, 1)");
    let mut g = TimeSeries::sample(tg, |t| eval_poly(&case.g0, t));
    for _ in 0..case.n {
        let i = rl_integral(&g, order);
        g = i.map(|v| case.a + case.b * v);
    }
    g.into_values()
}

/// Recursion through product-integration I^beta; the discrepancy between
/// two step sizes is credited as quadrature tolerance node-wise.
fn sequence_numeric(seed: u64, n_samples: usize) -> CheckReport {
    let cases = sequence_cases(seed, n_samples);
    let steps = 256;
    let mut worst = Worst::new();
    let mut max_est: f64 = 0.0;
    for (s, case) in cases.iter().enumerate() {
        let coarse = numeric_recursion(case, steps);
        let fine = numeric_recursion(case, 2 * steps);
        for j in 1..=steps {
            let t = j as f64 / steps as f64;
            let bound = case.bound(t).max(f64::MIN_POSITIVE);
            let est = 2.0 * (coarse[j] - fine[2 * j]).abs();
            max_est = max_est.max(est / bound);
            worst.push((bound - coarse[j] + est) / bound, || json!({ "sample": s, "t": t }));
        }
    }
    worst.report("gronwall_sequence_numeric", 1e-12).with("dt", 1.0 / steps as f64).with("max_quadrature_estimate", max_est)
}

const ORDER_STEPS: [usize; 3] = [32, 64, 128];

/// Empirical orders from errors at successive halvings; None below the noise floor.
fn orders(errs: &[f64]) -> Option<Vec<f64>> {
    if errs.iter().any(|&e| e < 1e-13) {
        return None;
    }
    Some(errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

fn order_report(name: &str, per_sample: Vec<(Vec<f64>, serde_json::Value)>) -> CheckReport {
    let mut worst = Worst::new();
    let mut skipped = 0;
    let mut min_order = f64::INFINITY;
    for (errs, ctx) in per_sample {
        match orders(&errs) {
            Some(o) => {
                let m = o.iter().cloned().fold(f64::INFINITY, f64::min);
                min_order = min_order.min(m);
                worst.push(m - 1.0, || json!({ "case": ctx, "errors": errs, "orders": o }));
            }
            None => skipped += 1,
        }
    }
    worst.report(name, 0.0).with("min_order", min_order).with("below_noise_floor", skipped)
}

/// I^alpha I^beta f against I^{alpha+beta} f, max over [1/2, 1]; at the first
/// nodes both sides are O(dt^{alpha+beta}) and carry that order.
pub fn semigroup_order(seed: u64, n_samples: usize) -> CheckReport {
    let mut rng = rng_for(seed, 13);
    let mut per_sample = Vec::new();
    for s in 0..n_samples {
        let alpha = rng.gen_range(0.15..0.5);
        let beta = rng.gen_range(0.15..0.5);
        let f = random_time_fn(&mut rng);
        let errs = ORDER_STEPS
            .iter()
            .map(|&steps| {
                let tg = TimeGrid::new(0.0, 1.0 / steps as f64, steps).expect("valid grid");
                let fs = TimeSeries::sample(tg, &f);
                let o = |x: f64| FracOrder::new(x).expect("order in (0, 1]");
                let lhs = rl_integral(&rl_integral(&fs, o(beta)), o(alpha));
                let rhs = rl_integral(&fs, o(alpha + beta));
                (steps / 2..=steps).map(|j| (lhs.values()[j] - rhs.values()[j]).abs()).fold(0.0, f64::max)
            })
            .collect();
        per_sample.push((errs, json!({ "sample": s, "alpha": alpha, "beta": beta })));
    }
    order_report("semigroup_order", per_sample)
}

/// L1 Caputo derivative of I^beta f against f on [1/2, 1]; near the origin
/// I^beta f behaves like t^beta and the L1 scheme is not consistent there.
pub fn left_inverse_order(seed: u64, n_samples: usize) -> CheckReport {
    let mut rng = rng_for(seed, 14);
    let mut per_sample = Vec::new();
    for s in 0..n_samples {
        let beta = rng.gen_range(0.2..0.8);
        let f = random_time_fn(&mut rng);
        let errs = ORDER_STEPS
            .iter()
            .map(|&steps| {
                let tg = TimeGrid::new(0.0, 1.0 / steps as f64, steps).expect("valid grid");
                let fs = TimeSeries::sample(tg, &f);
                let i = rl_integral(&fs, FracOrder::new(beta).expect("beta in (0, 1)"));
                let d = caputo_derivative(&i, FracOrder::caputo(beta).expect("beta in (0, 1)")).expect("grid has steps");
                (steps / 2..=steps).map(|j| (d.values()[j] - fs.values()[j]).abs()).fold(0.0, f64::max)
            })
            .collect();
        per_sample.push((errs, json!({ "sample": s, "beta": beta })));
    }
    order_report("left_inverse_order", per_sample)
}
