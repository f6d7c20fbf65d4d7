use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::inequalities::chain_margins;
use super::{classical_oracle, CheckReport, VerifyError, Worst};
use crate::fracops::{gamma_fn, FracOrder, TimeGrid};
use crate::linsolve::{build_propagators, solve_linear, IntervalForcing, Trajectory};
use crate::mlf::{kernel_e, mittag_leffler, MLParams, MlConfig, MlError};
use crate::picard::{convergence_envelope, fit_envelope, solve_nonlinear, PicardConfig};
use crate::spectral::{
    l2_norm2, linear_operator, mode_symbol, semi_norm, spectral_derivative, Field, ModelParams, SpectralGrid,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManufacturedCase {
    Linear,
    Nonlinear,
}

/// u*(x, t) = A e^{-x^2} (1 + t^2), forced so that it solves the linear
/// (gamma ignored) or the full equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub case: ManufacturedCase,
    pub amplitude: f64,
}

impl Manufactured {
    pub fn new(case: ManufacturedCase) -> Self {
        Self { case, amplitude: 1.0 }
    }

    pub fn exact(&self, grid: &SpectralGrid, t: f64) -> Field {
        let s = self.amplitude * (1.0 + t * t);
        Field::from_fn(grid, |x| s * (-x * x).exp())
    }

    /// Maximum over nodes t > t0 of the relative L2 error (absolute when u* = 0).
    pub fn error(&self, traj: &Trajectory) -> Result<f64, VerifyError> {
        let mut worst: f64 = 0.0;
        for (t, u) in traj.timegrid.nodes().zip(&traj.fields).skip(1) {
            let exact = self.exact(&traj.grid, t);
            let diff = l2_norm2(&u.add_scaled(-1.0, &exact)?).sqrt();
            let scale = l2_norm2(&exact).sqrt();
            worst = worst.max(if scale > 0.0 { diff / scale } else { diff });
        }
        Ok(worst)
    }
}

/// Initial datum and midpoint-sampled forcing of the manufactured problem.
pub fn manufactured_problem(
    m: &Manufactured,
    params: &ModelParams,
    grid: &SpectralGrid,
    timegrid: &TimeGrid,
) -> Result<(Field, IntervalForcing), VerifyError> {
    let beta = params.beta.value();
    let amp = m.amplitude;
    let g0 = Field::from_fn(grid, |x| (-x * x).exp());
    let lg0 = linear_operator(params, &g0);
    let nl0 = Field::from_fn(grid, |x| -2.0 * x * (-2.0 * x * x).exp());
    let c = 2.0 / gamma_fn(3.0 - beta)?;
    let gamma = match m.case {
        ManufacturedCase::Linear => 0.0,
        ManufacturedCase::Nonlinear => params.gamma,
    };
    let f = IntervalForcing::from_midpoints(grid, timegrid, |t| {
        let s = 1.0 + t * t;
        g0.scaled(amp * c * t.powf(2.0 - beta))
            .add_scaled(amp * s, &lg0)
            .and_then(|f| f.add_scaled(gamma * amp * amp * s * s, &nl0))
            .expect("fields share the grid")
    })?;
    Ok((g0.scaled(amp), f))
}

fn solve_manufactured(
    m: &Manufactured,
    params: &ModelParams,
    grid: &SpectralGrid,
    timegrid: &TimeGrid,
) -> Result<Trajectory, VerifyError> {
    let (phi, f) = manufactured_problem(m, params, grid, timegrid)?;
    Ok(match m.case {
        ManufacturedCase::Linear => {
            let table = build_propagators(params, grid, timegrid)?;
            solve_linear(&phi, &f, &table, timegrid)?
        }
        ManufacturedCase::Nonlinear => solve_nonlinear(&phi, &f, params, grid, timegrid, &PicardConfig::default())?.0,
    })
}

/// Errors at dt, dt/2, dt/4 and the observed orders; margin is min order - 1.
pub fn manufactured_residual(
    m: &Manufactured,
    params: &ModelParams,
    grid: &SpectralGrid,
    timegrid: &TimeGrid,
) -> CheckReport {
    let name = match m.case {
        ManufacturedCase::Linear => "manufactured_linear",
        ManufacturedCase::Nonlinear => "manufactured_nonlinear",
    };
    if timegrid.t0 != 0.0 {
        return CheckReport::failed(name, &"manufactured runs start at t = 0");
    }
    let mut errs = Vec::new();
    for k in 0..3u32 {
        let scale = 1usize << k;
        let tg = match TimeGrid::new(0.0, timegrid.dt / scale as f64, timegrid.n_steps * scale) {
            Ok(tg) => tg,
            Err(e) => return CheckReport::failed(name, &e),
        };
        match solve_manufactured(m, params, grid, &tg).and_then(|traj| m.error(&traj)) {
            Ok(e) => errs.push(e),
            Err(e) => return CheckReport::failed(name, &e),
        }
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let margin = if errs.iter().all(|&e| e == 0.0) {
        0.0
    } else {
        orders.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0
    };
    CheckReport::new(name, errs.len(), margin, 0.0)
        .with("amplitude", m.amplitude)
        .with("dt", timegrid.dt)
        .with("errors", errs.clone())
        .with("orders", orders.into_iter().map(|o| if o.is_finite() { json!(o) } else { json!(null) }).collect::<Vec<_>>())
        .with("final_error", errs[0])
}

/// |E_{beta,1}(-P t^beta) - e^{-P t}| / |e^{-P t}|.
pub fn classical_mode_discrepancy(beta: FracOrder, p: Complex64, t: f64) -> Result<f64, VerifyError> {
    let frac = kernel_e(beta, p, t, &MlConfig::default())?;
    let classical = (-p * t).exp();
    Ok((frac - classical).norm() / classical.norm())
}

/// Modes kept in the per-mode comparison: |e^{-P T}| >= this. Below it the
/// algebraic tail of the Mittag-Leffler kernel dominates the relative error.
const RESOLVED_MODE: f64 = 0.1;

const MODE_THRESHOLD: f64 = 1e-2;
const FIELD_THRESHOLD: f64 = 2e-2;

/// Near-classical run against the exponential propagator (gamma = 0) or the
/// integrating-factor RK4 oracle (gamma != 0), zero forcing.
pub fn classical_limit(
    params: &ModelParams,
    grid: &SpectralGrid,
    timegrid: &TimeGrid,
    phi: &Field,
) -> Result<CheckReport, VerifyError> {
    let eps = 1.0 - params.beta.value();
    if !(0.99e-4..=1.01e-2).contains(&eps) {
        return Err(VerifyError::Setup(format!("1 - beta = {eps:.3e} outside [1e-4, 1e-2]")));
    }
    if timegrid.t0 != 0.0 {
        return Err(VerifyError::Setup("classical comparison starts at t = 0".into()));
    }
    let steps = timegrid.n_steps;
    let zero = IntervalForcing::zero(grid, steps);
    if params.gamma == 0.0 {
        let table = build_propagators(params, grid, timegrid)?;
        let traj = solve_linear(phi, &zero, &table, timegrid)?;
        let t = timegrid.end();
        let mut worst_mode: f64 = 0.0;
        let mut checked = 0;
        let mut exact = Vec::with_capacity(grid.n_points());
        for idx in 0..grid.n_points() {
            let ref_e = (-mode_symbol(params, grid, idx) * t).exp();
            exact.push(phi.coeffs()[idx] * ref_e);
            if idx <= grid.n_points() / 2 && ref_e.norm() >= RESOLVED_MODE {
                checked += 1;
                worst_mode = worst_mode.max((table.e(idx, steps) - ref_e).norm() / ref_e.norm());
            }
        }
        let exact = Field::from_coeffs(grid, exact)?;
        let field = l2_norm2(&traj.last().add_scaled(-1.0, &exact)?).sqrt() / l2_norm2(&exact).sqrt();
        return Ok(CheckReport::new("classical_limit_linear", checked, MODE_THRESHOLD - worst_mode, 0.0)
            .with("epsilon", eps)
            .with("max_mode_discrepancy", worst_mode)
            .with("field_discrepancy", field)
            .with("threshold", MODE_THRESHOLD));
    }
    let (traj, _) = solve_nonlinear(phi, &zero, params, grid, timegrid, &PicardConfig::default())?;
    let oracle = classical_oracle(params, phi, timegrid, 4)?;
    let mut disc: f64 = 0.0;
    for (u, v) in traj.fields.iter().zip(&oracle).skip(1) {
        let scale = l2_norm2(v).sqrt();
        disc = disc.max(l2_norm2(&u.add_scaled(-1.0, v)?).sqrt() / scale.max(f64::MIN_POSITIVE));
    }
    Ok(CheckReport::new("classical_limit_nonlinear", steps, FIELD_THRESHOLD - disc, 0.0)
        .with("epsilon", eps)
        .with("discrepancy", disc)
        .with("threshold", FIELD_THRESHOLD))
}

fn bits_equal(a: &Trajectory, b: &Trajectory) -> bool {
    a.fields.len() == b.fields.len()
        && a.fields.iter().zip(&b.fields).all(|(x, y)| {
            x.samples().iter().zip(y.samples()).all(|(p, q)| p.to_bits() == q.to_bits())
        })
}

fn ml_bound(beta: FracOrder, c: f64, t: f64) -> Result<f64, VerifyError> {
    let b = beta.value();
    match mittag_leffler(MLParams::new(b, 1.0)?, Complex64::new(c * t.powf(b), 0.0)) {
        Ok(v) => Ok(v.re),
        Err(MlError::Overflow(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e.into()),
    }
}

/// Twin runs from phi and phi + delta psi: r(t) = ||w||^2 / ||w(0)||^2 against
/// E_beta(C t^beta) with C = |gamma| sup(|u1_x| + 2|u2_x|) + 2 max(0, -min Re P).
pub fn stability_uniqueness(
    params: &ModelParams,
    grid: &SpectralGrid,
    timegrid: &TimeGrid,
    phi: &Field,
    delta: f64,
) -> Result<CheckReport, VerifyError> {
    let cfg = PicardConfig { tol: 1e-12, max_iter: 100, ..Default::default() };
    let zero = IntervalForcing::zero(grid, timegrid.n_steps);
    let (u1, _) = solve_nonlinear(phi, &zero, params, grid, timegrid, &cfg)?;
    if delta == 0.0 {
        let (again, _) = solve_nonlinear(phi, &zero, params, grid, timegrid, &cfg)?;
        let same = bits_equal(&u1, &again);
        return Ok(CheckReport::new("uniqueness_deterministic", u1.fields.len(), if same { 0.0 } else { f64::NEG_INFINITY }, 0.0)
            .with("byte_identical", same));
    }
    let psi = Field::from_fn(grid, |x| (-(x - 0.5) * (x - 0.5)).exp());
    let phi2 = phi.add_scaled(delta, &psi)?;
    let (u2, _) = solve_nonlinear(&phi2, &zero, params, grid, timegrid, &cfg)?;

    let mut sup: f64 = 0.0;
    for (a, b) in u1.fields.iter().zip(&u2.fields) {
        let ax = spectral_derivative(a, 1);
        let bx = spectral_derivative(b, 1);
        let s = ax.samples().iter().zip(bx.samples()).map(|(p, q)| p.abs() + 2.0 * q.abs()).fold(0.0, f64::max);
        sup = sup.max(s);
    }
    let min_re = (0..grid.n_points()).map(|i| mode_symbol(params, grid, i).re).fold(f64::INFINITY, f64::min);
    let c_hat = params.gamma.abs() * sup + 2.0 * (-min_re).max(0.0);

    let w: Vec<Field> = u1.fields.iter().zip(&u2.fields).map(|(a, b)| b.add_scaled(-1.0, a)).collect::<Result<_, _>>()?;
    let w0 = l2_norm2(&w[0]);
    let mut worst = Worst::new();
    let mut r_max: f64 = 0.0;
    for (n, (t, wn)) in timegrid.nodes().zip(&w).enumerate().skip(1) {
        let r = l2_norm2(wn) / w0;
        r_max = r_max.max(r);
        let bound = ml_bound(params.beta, c_hat, t - timegrid.t0)?;
        let margin = if !r.is_finite() { f64::NEG_INFINITY } else if bound.is_infinite() { 1.0 } else { (bound - r) / bound };
        worst.push(margin, || json!({ "node": n, "t": t, "r": r, "bound": bound }));
    }
    let mut envelope_error = None;
    if params.gamma == 0.0 {
        // w solves the linear problem: r follows the per-mode kernels exactly
        let table = build_propagators(params, grid, &TimeGrid::new(0.0, timegrid.dt, timegrid.n_steps)?)?;
        let c0 = w[0].coeffs();
        let total: f64 = c0.iter().map(|c| c.norm_sqr()).sum();
        let mut err: f64 = 0.0;
        for (n, wn) in w.iter().enumerate() {
            let pred: f64 = c0.iter().enumerate().map(|(i, c)| c.norm_sqr() * table.e(i, n).norm_sqr()).sum::<f64>() / total;
            let r = l2_norm2(wn) / w0;
            let e = (r - pred).abs() / pred;
            err = err.max(e);
            worst.push(-e, || json!({ "node": n, "linear_envelope_error": e }));
        }
        envelope_error = Some(err);
    }
    let name = if params.gamma == 0.0 { "uniqueness_linear" } else { "uniqueness_stability" };
    let mut report = worst.report(name, 1e-8).with("delta", delta).with("c_hat", c_hat).with("max_ratio", r_max);
    if let Some(e) = envelope_error {
        report = report.with("linear_envelope_error", e);
    }
    Ok(report)
}

/// d_i^2 <= C K^{i-1} T^{(i-1)beta} / Gamma((i-1)beta + 1) for i >= 3 with C, K
/// fitted from the first three differences of a single-window run.
pub fn picard_envelope(
    params: &ModelParams,
    grid: &SpectralGrid,
    timegrid: &TimeGrid,
    phi: &Field,
) -> Result<CheckReport, VerifyError> {
    let cfg = PicardConfig { tol: 1e-12, max_iter: 100, ..Default::default() };
    let zero = IntervalForcing::zero(grid, timegrid.n_steps);
    let (_, report) = solve_nonlinear(phi, &zero, params, grid, timegrid, &cfg)?;
    let d = &report.windows[0].d;
    let length = timegrid.end() - timegrid.t0;
    let k = fit_envelope(d, length, params.beta)
        .ok_or_else(|| VerifyError::Setup(format!("need three nonzero differences, got {d:?}")))?;
    let c = d[0] * d[0];
    let mut worst = Worst::new();
    for (i, di) in d.iter().enumerate().skip(2) {
        let env = c * convergence_envelope(i + 1, k, length, params.beta);
        worst.push((env - di * di) / env, || json!({ "iterate": i + 1, "d": di, "envelope": env }));
    }
    Ok(worst.report("picard_envelope", 1e-8).with("c", c).with("k", k).with("d", d.clone()))
}

/// factor * |||phi|||_{m,s}^2 for 0 <= m, s <= 3.
pub fn default_ceilings(phi: &Field, factor: f64) -> [[f64; 4]; 4] {
    let mut c = [[0.0; 4]; 4];
    for (m, row) in c.iter_mut().enumerate() {
        for (s, v) in row.iter_mut().enumerate() {
            *v = factor * semi_norm(phi, m as u32, s as u32).max(f64::MIN_POSITIVE);
        }
    }
    c
}

/// Semi-norms up to (3, 3) under their ceilings and the weighted-sup chain
/// on every node of the trajectory.
pub fn schwartz_persistence(traj: &Trajectory, ceilings: &[[f64; 4]; 4]) -> CheckReport {
    let mut worst = Worst::new();
    let mut peak = [[0.0f64; 4]; 4];
    for (n, (t, f)) in traj.timegrid.nodes().zip(&traj.fields).enumerate() {
        for m in 0..4 {
            for s in 0..4 {
                let v = semi_norm(f, m as u32, s as u32);
                peak[m][s] = peak[m][s].max(v);
                let c = ceilings[m][s];
                worst.push((c - v) / c, || json!({ "node": n, "t": t, "m": m, "s": s, "seminorm": v, "ceiling": c }));
            }
        }
        worst.merge(chain_margins(f, 3, |m, s| json!({ "node": n, "t": t, "chain_m": m, "chain_s": s })));
    }
    worst.report("schwartz_persistence", 1e-8).with("peak_seminorms", peak.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}
