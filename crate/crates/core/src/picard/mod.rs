//! Successive approximations u_i = S(phi, f - gamma u_{i-1} u_{i-1,x}) with
//! optional windowed continuation through the Caputo history term.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fracops::{ln_abs_gamma, FracOrder, TimeGrid};
use crate::linsolve::{
    build_propagators, caputo_history_forcing, solve_linear, IntervalForcing, LinsolveError, PropagatorTable,
    Trajectory,
};
use crate::mlf::{evaluate, MLParams, MlConfig, MlError};
use crate::spectral::{check_boundary_decay, nonlinear_term, norm2_pair, Field, ModelParams, SpectralError, SpectralGrid};

#[derive(Debug, Error)]
pub enum PicardError {
    #[error(transparent)]
    Linsolve(#[from] LinsolveError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Frac(#[from] crate::fracops::FracError),
    #[error("invalid Picard setting: {0}")]
    Config(String),
    #[error("Picard iteration diverged in window [{t_start}, {t_end}] at iterate {iteration} (d = {d:.3e})")]
    Diverged { t_start: f64, t_end: f64, iteration: usize, d: f64, report: Box<ConvergenceReport> },
    #[error("boundary decay watchdog tripped at t = {t}: {source}")]
    Watchdog { t: f64, source: SpectralError },
    #[error("norm ||u||^2 + ||u_xx||^2 = {value:.3e} exceeds ceiling {ceiling:.3e} at t = {t}")]
    Ceiling { t: f64, value: f64, ceiling: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    Single,
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub window_mode: WindowMode,
    /// Optional envelope constant reported alongside the fitted one.
    pub k_hat: Option<f64>,
    /// Overrides the computed A in the auto window estimate.
    pub a_hat: Option<f64>,
    pub div_factor: f64,
    pub decay_tol: f64,
    pub ceiling: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 60,
            window_mode: WindowMode::Single,
            k_hat: None,
            a_hat: None,
            div_factor: 10.0,
            decay_tol: 1e-6,
            ceiling: 1e12,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<(), PicardError> {
        if !(self.tol > 0.0) {
            return Err(PicardError::Config(format!("tol = {} must be positive", self.tol)));
        }
        if self.max_iter < 2 {
            return Err(PicardError::Config(format!("max_iter = {} must be at least 2", self.max_iter)));
        }
        if let WindowMode::Fixed(t1) = self.window_mode {
            if !(t1 > 0.0) {
                return Err(PicardError::Config(format!("window length {t1} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIter,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub t_start: f64,
    pub t_end: f64,
    pub iterations: usize,
    pub d: Vec<f64>,
    /// C * envelope(i, K_fit) with C = d_1^2; empty when fewer than three iterates.
    pub envelope: Vec<f64>,
    pub k_fit: Option<f64>,
    pub k_hat: Option<f64>,
    pub stop_reason: StopReason,
    pub max_norm2_pair: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub windows: Vec<WindowReport>,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub window_estimate: Option<f64>,
}

impl ConvergenceReport {
    pub fn boundaries(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.windows.iter().map(|w| w.t_start).collect();
        if let Some(w) = self.windows.last() {
            b.push(w.t_end);
        }
        b
    }
}

/// (beta / (4 A c7 E_{beta,beta}(c6 T^beta)))^{1/beta}.
pub fn local_step_estimate(a: f64, c6: f64, c7: f64, beta: FracOrder, t_final: f64) -> Result<f64, PicardError> {
    if !(a > 0.0 && c6 > 0.0 && c7 > 0.0 && t_final > 0.0) {
        return Err(PicardError::Config(format!(
            "local step estimate needs positive inputs, got A={a}, c6={c6}, c7={c7}, T={t_final}"
        )));
    }
    let b = beta.value();
    let e = evaluate(MLParams::new(b, b)?, Complex64::new(c6 * t_final.powf(b), 0.0), &MlConfig::default())?;
    Ok((b / (4.0 * a * c7 * e.value.re)).powf(1.0 / b))
}

/// A = (c8 T^beta / beta) E_{beta,beta}(c6 T^beta) max F + U_0 E_beta(c6 T^beta).
pub fn window_constant(u0: f64, f_max: f64, c6: f64, c8: f64, beta: FracOrder, t_final: f64) -> Result<f64, PicardError> {
    let b = beta.value();
    let z = Complex64::new(c6 * t_final.powf(b), 0.0);
    let cfg = MlConfig::default();
    let ebb = evaluate(MLParams::new(b, b)?, z, &cfg)?.value.re;
    let eb1 = evaluate(MLParams::new(b, 1.0)?, z, &cfg)?.value.re;
    Ok(c8 * t_final.powf(b) / b * ebb * f_max + u0 * eb1)
}

/// Default proof constant 1 + |b| + |c| + |d| + |k| + gamma^2, used for c6, c7 and c8.
pub fn default_constant(p: &ModelParams) -> f64 {
    1.0 + p.b.abs() + p.c.abs() + p.d.abs() + p.k.abs() + p.gamma * p.gamma
}

/// K^{i-1} T^{(i-1) beta} / Gamma((i-1) beta + 1).
pub fn convergence_envelope(i: usize, k: f64, t: f64, beta: FracOrder) -> f64 {
    assert!(i >= 1, "envelope index starts at 1");
    let j = (i - 1) as f64;
    if i == 1 {
        return 1.0;
    }
    if k == 0.0 || t == 0.0 {
        return 0.0;
    }
    let b = beta.value();
    (j * (k.ln() + b * t.ln()) - ln_abs_gamma(j * b + 1.0).0).exp()
}

/// Smallest K for which d_2^2 and d_3^2 lie under d_1^2 * envelope.
pub fn fit_envelope(d: &[f64], t: f64, beta: FracOrder) -> Option<f64> {
    if d.len() < 3 || d[0] == 0.0 {
        return None;
    }
    let b = beta.value();
    let c = d[0] * d[0];
    let k2 = d[1] * d[1] / c * (ln_abs_gamma(b + 1.0).0).exp() / t.powf(b);
    let k3 = (d[2] * d[2] / c * (ln_abs_gamma(2.0 * b + 1.0).0).exp()).sqrt() / t.powf(b);
    Some(k2.max(k3))
}

fn nonlinear_forcing(prev: &Trajectory, gamma: f64) -> Result<IntervalForcing, PicardError> {
    let nl: Vec<Field> = {
        use rayon::prelude::*;
        prev.fields.par_iter().map(nonlinear_term).collect()
    };
    let avg = IntervalForcing::from_node_average(&nl)?;
    Ok(IntervalForcing::zero(&prev.grid, avg.n_steps()).add_scaled(-gamma, &avg)?)
}

/// One successive approximation on a window.
pub fn picard_step(
    prev: &Trajectory,
    phi: &Field,
    f: &IntervalForcing,
    table: &PropagatorTable,
) -> Result<Trajectory, PicardError> {
    let gamma = table.params().gamma;
    let forcing = if gamma == 0.0 { f.clone() } else { f.add_scaled(1.0, &nonlinear_forcing(prev, gamma)?)? };
    Ok(solve_linear(phi, &forcing, table, &prev.timegrid)?)
}

/// Constant-in-time extension of phi.
pub fn initial_iterate(phi: &Field, timegrid: &TimeGrid) -> Trajectory {
    Trajectory { grid: phi.grid().clone(), timegrid: *timegrid, fields: vec![phi.clone(); timegrid.n_steps + 1] }
}

fn pair_distance(a: &Trajectory, b: &Trajectory) -> Result<f64, PicardError> {
    let mut d: f64 = 0.0;
    for (x, y) in a.fields.iter().zip(&b.fields) {
        d = d.max(norm2_pair(&x.add_scaled(-1.0, y)?).sqrt());
    }
    Ok(d)
}

struct WindowOutcome {
    traj: Trajectory,
    report: WindowReport,
}

fn iterate_window(
    phi: &Field,
    forcing: &IntervalForcing,
    table: &PropagatorTable,
    timegrid: &TimeGrid,
    cfg: &PicardConfig,
) -> Result<WindowOutcome, PicardError> {
    let beta = table.params().beta;
    let mut prev = initial_iterate(phi, timegrid);
    let mut d = Vec::new();
    let mut stop = StopReason::MaxIter;
    for i in 1..=cfg.max_iter {
        let next = picard_step(&prev, phi, forcing, table)?;
        let di = pair_distance(&next, &prev)?;
        d.push(di);
        prev = next;
        if !di.is_finite() {
            stop = StopReason::Diverged;
            break;
        }
        if i >= 2 && di < cfg.tol {
            stop = StopReason::Converged;
            break;
        }
        if d.len() >= 4 {
            let n = d.len();
            let growing = d[n - 3] > d[n - 4] && d[n - 2] > d[n - 3] && d[n - 1] > d[n - 2];
            if growing && d[n - 1] > cfg.div_factor * d[n - 4] {
                stop = StopReason::Diverged;
                break;
            }
        }
    }
    let length = timegrid.end() - timegrid.t0;
    let k_fit = fit_envelope(&d, length, beta);
    let envelope = match k_fit {
        Some(k) => (1..=d.len()).map(|i| d[0] * d[0] * convergence_envelope(i, k, length, beta)).collect(),
        None => Vec::new(),
    };
    let max_norm2_pair = prev.fields.iter().map(norm2_pair).fold(0.0, f64::max);
    let report = WindowReport {
        t_start: timegrid.t0,
        t_end: timegrid.end(),
        iterations: d.len(),
        d,
        envelope,
        k_fit,
        k_hat: cfg.k_hat,
        stop_reason: stop,
        max_norm2_pair,
    };
    Ok(WindowOutcome { traj: prev, report })
}

fn accept(traj: &Trajectory, cfg: &PicardConfig) -> Result<(), PicardError> {
    for (t, f) in traj.timegrid.nodes().zip(&traj.fields) {
        check_boundary_decay(f, cfg.decay_tol).map_err(|source| PicardError::Watchdog { t, source })?;
        let value = norm2_pair(f);
        if !(value <= cfg.ceiling) {
            return Err(PicardError::Ceiling { t, value, ceiling: cfg.ceiling });
        }
    }
    Ok(())
}

/// Auto-window hint from the default constants, in steps of `dt`.
pub fn auto_window(
    phi: &Field,
    forcing: &IntervalForcing,
    params: &ModelParams,
    timegrid: &TimeGrid,
    cfg: &PicardConfig,
) -> Result<f64, PicardError> {
    let c = default_constant(params);
    let a = match cfg.a_hat {
        Some(a) => a,
        None => {
            let grid = phi.grid();
            let f_max = (1..=forcing.n_steps())
                .map(|m| Field::from_coeffs(grid, forcing.interval(m).to_vec()).map(|f| norm2_pair(&f)))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(0.0, f64::max);
            window_constant(norm2_pair(phi), f_max, c, c, params.beta, params.t_final)?
        }
    };
    if a == 0.0 {
        return Ok(timegrid.end() - timegrid.t0);
    }
    local_step_estimate(a, c, c, params.beta, params.t_final)
}

/// Solves the nonlinear problem on `timegrid` with forcing `f` given per interval.
pub fn solve_nonlinear(
    phi: &Field,
    f: &IntervalForcing,
    params: &ModelParams,
    grid: &SpectralGrid,
    timegrid: &TimeGrid,
    cfg: &PicardConfig,
) -> Result<(Trajectory, ConvergenceReport), PicardError> {
    cfg.validate()?;
    if phi.grid() != grid || f.n_steps() != timegrid.n_steps {
        return Err(PicardError::Config("initial datum or forcing does not match the grids".into()));
    }
    check_boundary_decay(phi, cfg.decay_tol).map_err(|source| PicardError::Watchdog { t: timegrid.t0, source })?;
    let total = timegrid.n_steps;
    let dt = timegrid.dt;
    let (mut window_steps, estimate, may_shrink) = match cfg.window_mode {
        WindowMode::Single => (total, None, false),
        WindowMode::Fixed(t1) => (((t1 / dt).round() as usize).clamp(1, total), None, false),
        WindowMode::Auto => {
            let est = auto_window(phi, f, params, timegrid, cfg)?;
            (((est / dt).floor() as usize).clamp(1, total), Some(est), true)
        }
    };
    let mut table = build_propagators(params, grid, &TimeGrid::new(0.0, dt, window_steps)?)?;
    let mut windows = Vec::new();
    let mut stitched: Option<Trajectory> = None;
    let mut start = 0usize;
    let mut current_phi = phi.clone();
    let mut iterations = 0;
    while start < total {
        let steps = window_steps.min(total - start);
        let tg = TimeGrid::new(timegrid.node(start), dt, steps)?;
        let mut forcing = f.slice(start, steps)?;
        if let Some(hist) = &stitched {
            let h = caputo_history_forcing(hist, params)?.on_window(&tg)?;
            forcing = forcing.add_scaled(-1.0, &h)?;
        }
        let outcome = iterate_window(&current_phi, &forcing, &table, &tg, cfg)?;
        iterations += outcome.report.iterations;
        if outcome.report.stop_reason == StopReason::Diverged {
            if may_shrink && window_steps > 1 {
                window_steps /= 2;
                continue;
            }
            let last = *outcome.report.d.last().unwrap_or(&f64::NAN);
            windows.push(outcome.report);
            let report = ConvergenceReport { windows, iterations, stop_reason: StopReason::Diverged, window_estimate: estimate };
            return Err(PicardError::Diverged {
                t_start: tg.t0,
                t_end: tg.end(),
                iteration: report.windows.last().map_or(0, |w| w.iterations),
                d: last,
                report: Box::new(report),
            });
        }
        accept(&outcome.traj, cfg)?;
        if table.timegrid().n_steps < steps {
            table = build_propagators(params, grid, &TimeGrid::new(0.0, dt, steps)?)?;
        }
        current_phi = outcome.traj.last().clone();
        windows.push(outcome.report);
        match stitched.as_mut() {
            Some(s) => s.extend(outcome.traj)?,
            None => stitched = Some(outcome.traj),
        }
        start += steps;
    }
    let stop_reason = if windows.iter().all(|w| w.stop_reason == StopReason::Converged) {
        StopReason::Converged
    } else {
        StopReason::MaxIter
    };
    let report = ConvergenceReport { windows, iterations, stop_reason, window_estimate: estimate };
    Ok((stitched.expect("at least one window"), report))
}
