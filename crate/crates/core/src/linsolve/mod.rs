//! Mode-wise mild solution of the linear problem
//! d^beta u + L u = g, u(0) = phi, with L diagonal in Fourier space.
//!
//! On a uniform grid the forcing is held constant on each interval and the
//! singular kernel is integrated exactly, so
//! u_hat(t_M) = phi_hat E_M + sum_{m=1}^{M} g_hat_m M_{M-m+1}
//! with E_m = E_{beta,1}(-P t_m^beta) and M_j = K(t_j) - K(t_{j-1}),
//! K(t) = t^beta E_{beta,beta+1}(-P t^beta).

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::fracops::{gamma_fn, TimeGrid};
use crate::mlf::{evaluate, kernel_antiderivative, MLParams, MlConfig, MlError};
use crate::spectral::{mode_symbol, Field, ModelParams, SpectralError, SpectralGrid};

#[derive(Debug, Error)]
pub enum LinsolveError {
    #[error("Mittag-Leffler evaluation failed for mode {mode} at step {step}: {source}")]
    Ml { mode: i64, step: usize, source: MlError },
    #[error("grids do not match: {0}")]
    Mismatch(String),
    #[error("history forcing requested at t = {t} inside the stored window ending at {end}")]
    History { t: f64, end: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Dispatcher settings for the tables: values far below 1 only need absolute accuracy.
pub fn table_ml_config() -> MlConfig {
    MlConfig { rel_tol: 1e-10, abs_tol: 1e-13, ..MlConfig::default() }
}

/// E_m and M_m for every mode, indexed `[mode][m]`, m = 0..=n_steps
/// (`moments[_][0]` is zero and unused).
#[derive(Debug, Clone)]
pub struct PropagatorTable {
    grid: SpectralGrid,
    timegrid: TimeGrid,
    params: ModelParams,
    e: Vec<Vec<Complex64>>,
    moments: Vec<Vec<Complex64>>,
}

impl PropagatorTable {
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn timegrid(&self) -> &TimeGrid {
        &self.timegrid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn e(&self, idx: usize, m: usize) -> Complex64 {
        self.e[idx][m]
    }

    pub fn moment(&self, idx: usize, m: usize) -> Complex64 {
        self.moments[idx][m]
    }

    /// True when `other` was built for the same spatial grid, step and step count.
    pub fn compatible_with(&self, grid: &SpectralGrid, timegrid: &TimeGrid) -> bool {
        self.grid == *grid && self.timegrid.dt == timegrid.dt && self.timegrid.n_steps >= timegrid.n_steps
    }
}

pub fn build_propagators(
    params: &ModelParams,
    grid: &SpectralGrid,
    timegrid: &TimeGrid,
) -> Result<PropagatorTable, LinsolveError> {
    let cfg = table_ml_config();
    let beta = params.beta;
    let b = beta.value();
    let n = grid.n_points();
    let steps = timegrid.n_steps;
    let ml_e = MLParams::new(b, 1.0).expect("beta in (0, 1]");
    let half: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..=n / 2)
        .into_par_iter()
        .map(|idx| {
            let p = mode_symbol(params, grid, idx);
            let fail = |step, source| LinsolveError::Ml { mode: grid.mode(idx), step, source };
            let mut e = Vec::with_capacity(steps + 1);
            let mut mom = Vec::with_capacity(steps + 1);
            e.push(Complex64::new(1.0, 0.0));
            mom.push(Complex64::new(0.0, 0.0));
            let mut k_prev = Complex64::new(0.0, 0.0);
            for m in 1..=steps {
                let t = m as f64 * timegrid.dt;
                let z = -p * t.powf(b);
                e.push(evaluate(ml_e, z, &cfg).map_err(|s| fail(m, s))?.value);
                let k = kernel_antiderivative(beta, p, t, &cfg).map_err(|s| fail(m, s))?;
                mom.push(k - k_prev);
                k_prev = k;
            }
            Ok((e, mom))
        })
        .collect::<Result<_, LinsolveError>>()?;
    let mut e = vec![Vec::new(); n];
    let mut moments = vec![Vec::new(); n];
    for (idx, (ei, mi)) in half.into_iter().enumerate() {
        if idx > 0 && idx < n / 2 {
            e[n - idx] = ei.iter().map(|c| c.conj()).collect();
            moments[n - idx] = mi.iter().map(|c| c.conj()).collect();
        }
        e[idx] = ei;
        moments[idx] = mi;
    }
    Ok(PropagatorTable { grid: grid.clone(), timegrid: *timegrid, params: *params, e, moments })
}

/// Forcing held constant on each interval (t_{m-1}, t_m], m = 1..=n_steps.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalForcing {
    n_points: usize,
    intervals: Vec<Vec<Complex64>>,
}

impl IntervalForcing {
    pub fn zero(grid: &SpectralGrid, n_steps: usize) -> Self {
        let n = grid.n_points();
        Self { n_points: n, intervals: vec![vec![Complex64::new(0.0, 0.0); n]; n_steps] }
    }

    /// Samples `g(t)` at interval midpoints.
    pub fn from_midpoints(
        grid: &SpectralGrid,
        timegrid: &TimeGrid,
        g: impl Fn(f64) -> Field + Sync,
    ) -> Result<Self, LinsolveError> {
        let intervals: Vec<Vec<Complex64>> = (1..=timegrid.n_steps)
            .into_par_iter()
            .map(|m| {
                let f = g(timegrid.midpoint(m));
                if f.grid() != grid {
                    return Err(LinsolveError::Mismatch("forcing field grid".into()));
                }
                Ok(f.coeffs().to_vec())
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { n_points: grid.n_points(), intervals })
    }

    /// Averages consecutive node fields, one interval per adjacent pair.
    pub fn from_node_average(nodes: &[Field]) -> Result<Self, LinsolveError> {
        if nodes.len() < 2 {
            return Err(LinsolveError::Mismatch("need at least two node fields".into()));
        }
        let n = nodes[0].grid().n_points();
        let intervals = nodes
            .windows(2)
            .map(|w| w[0].coeffs().iter().zip(w[1].coeffs()).map(|(a, b)| 0.5 * (a + b)).collect())
            .collect();
        Ok(Self { n_points: n, intervals })
    }

    pub fn from_intervals(n_points: usize, intervals: Vec<Vec<Complex64>>) -> Result<Self, LinsolveError> {
        if intervals.iter().any(|v| v.len() != n_points) {
            return Err(LinsolveError::Mismatch("interval coefficient length".into()));
        }
        Ok(Self { n_points, intervals })
    }

    pub fn n_steps(&self) -> usize {
        self.intervals.len()
    }

    /// Intervals `start + 1 ..= start + steps` as a forcing of their own.
    pub fn slice(&self, start: usize, steps: usize) -> Result<Self, LinsolveError> {
        if start + steps > self.n_steps() {
            return Err(LinsolveError::Mismatch(format!(
                "slice {start}+{steps} exceeds {} intervals",
                self.n_steps()
            )));
        }
        Ok(Self { n_points: self.n_points, intervals: self.intervals[start..start + steps].to_vec() })
    }

    pub fn interval(&self, m: usize) -> &[Complex64] {
        &self.intervals[m - 1]
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &IntervalForcing) -> Result<Self, LinsolveError> {
        if self.n_points != other.n_points || self.n_steps() != other.n_steps() {
            return Err(LinsolveError::Mismatch("forcing shapes differ".into()));
        }
        let intervals = self
            .intervals
            .iter()
            .zip(&other.intervals)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y * s).collect())
            .collect();
        Ok(Self { n_points: self.n_points, intervals })
    }
}

/// Node fields of a solution on a window, `fields[0]` at `timegrid.t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: SpectralGrid,
    pub timegrid: TimeGrid,
    pub fields: Vec<Field>,
}

impl Trajectory {
    pub fn last(&self) -> &Field {
        self.fields.last().expect("trajectory has nodes")
    }

    pub fn times(&self) -> Vec<f64> {
        self.timegrid.nodes().collect()
    }

    /// Joins a window that starts where this one ends; the shared node is kept once.
    pub fn extend(&mut self, next: Trajectory) -> Result<(), LinsolveError> {
        let end = self.timegrid.end();
        if next.grid != self.grid
            || (next.timegrid.dt - self.timegrid.dt).abs() > 1e-12 * self.timegrid.dt
            || (next.timegrid.t0 - end).abs() > 1e-9 * self.timegrid.dt.max(end.abs())
        {
            return Err(LinsolveError::Mismatch("windows are not contiguous".into()));
        }
        self.timegrid.n_steps += next.timegrid.n_steps;
        self.fields.extend(next.fields.into_iter().skip(1));
        Ok(())
    }
}

pub fn solve_linear(
    phi: &Field,
    forcing: &IntervalForcing,
    table: &PropagatorTable,
    timegrid: &TimeGrid,
) -> Result<Trajectory, LinsolveError> {
    let grid = table.grid();
    if phi.grid() != grid {
        return Err(LinsolveError::Mismatch("initial field".into()));
    }
    if !table.compatible_with(grid, timegrid) {
        return Err(LinsolveError::Mismatch("propagator table does not cover the time grid".into()));
    }
    let steps = timegrid.n_steps;
    if forcing.n_steps() != steps || forcing.n_points != grid.n_points() {
        return Err(LinsolveError::Mismatch(format!(
            "forcing has {} intervals for {} steps",
            forcing.n_steps(),
            steps
        )));
    }
    let n = grid.n_points();
    let phi_hat = phi.coeffs();
    // per mode: all node values
    let per_mode: Vec<Vec<Complex64>> = (0..=n / 2)
        .into_par_iter()
        .map(|idx| {
            let e = &table.e[idx];
            let mom = &table.moments[idx];
            let g: Vec<Complex64> = (1..=steps).map(|m| forcing.interval(m)[idx]).collect();
            (0..=steps)
                .map(|big_m| {
                    let mut acc = phi_hat[idx] * e[big_m];
                    for m in 1..=big_m {
                        acc += g[m - 1] * mom[big_m - m + 1];
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let fields = (0..=steps)
        .into_par_iter()
        .map(|step| {
            let mut c = vec![Complex64::new(0.0, 0.0); n];
            for idx in 0..=n / 2 {
                c[idx] = per_mode[idx][step];
                if idx > 0 && idx < n / 2 {
                    c[n - idx] = c[idx].conj();
                }
            }
            Field::from_coeffs(grid, c)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Trajectory { grid: grid.clone(), timegrid: *timegrid, fields })
}

/// Caputo memory of a stored trajectory on [t_a, t_1], evaluated for t > t_1.
///
/// The stored solution is interpolated linearly between nodes, so at t the
/// history term is
/// sum_j (u_{j+1} - u_j)/dt [(t - t_j)^{1-beta} - (t - t_{j+1})^{1-beta}] / Gamma(2 - beta).
#[derive(Debug, Clone)]
pub struct HistoryForcing {
    beta: f64,
    inv_gamma: f64,
    times: Vec<f64>,
    slopes: Vec<Vec<Complex64>>,
    n_points: usize,
}

impl HistoryForcing {
    pub fn end(&self) -> f64 {
        *self.times.last().expect("history has nodes")
    }

    /// History coefficients at `t > t_1`.
    pub fn at(&self, t: f64) -> Result<Vec<Complex64>, LinsolveError> {
        let end = self.end();
        if !(t > end) {
            return Err(LinsolveError::History { t, end });
        }
        let e = 1.0 - self.beta;
        let mut acc = vec![Complex64::new(0.0, 0.0); self.n_points];
        for (j, slope) in self.slopes.iter().enumerate() {
            let w = ((t - self.times[j]).powf(e) - (t - self.times[j + 1]).powf(e)) * self.inv_gamma;
            for (a, s) in acc.iter_mut().zip(slope) {
                *a += s * w;
            }
        }
        Ok(acc)
    }

    /// Midpoint samples over a window starting at t_1.
    pub fn on_window(&self, timegrid: &TimeGrid) -> Result<IntervalForcing, LinsolveError> {
        let intervals = (1..=timegrid.n_steps)
            .into_par_iter()
            .map(|m| self.at(timegrid.midpoint(m)))
            .collect::<Result<_, _>>()?;
        IntervalForcing::from_intervals(self.n_points, intervals)
    }
}

pub fn caputo_history_forcing(traj: &Trajectory, params: &ModelParams) -> Result<HistoryForcing, LinsolveError> {
    let beta = params.beta.value();
    if beta >= 1.0 {
        return Err(LinsolveError::Mismatch("history forcing needs beta < 1".into()));
    }
    let times = traj.times();
    let dt = traj.timegrid.dt;
    let slopes = traj
        .fields
        .windows(2)
        .map(|w| w[1].coeffs().iter().zip(w[0].coeffs()).map(|(b, a)| (b - a) / dt).collect())
        .collect();
    let inv_gamma = 1.0 / gamma_fn(2.0 - beta).expect("2 - beta in (1, 2)");
    Ok(HistoryForcing { beta, inv_gamma, times, slopes, n_points: traj.grid.n_points() })
}
