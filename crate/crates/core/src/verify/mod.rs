//! Executable checks of the analytic inequalities and of solver behaviour.
//!
//! Every check produces a [`CheckReport`]. A check passes when its worst
//! signed margin is at least `-tolerance`; failures are reported, not raised.
//! The suite is deterministic for a given seed.

mod gronwall;
mod inequalities;
mod oracle;
mod solvers;

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::fracops::{FracError, FracOrder, TimeGrid};
use crate::linsolve::LinsolveError;
use crate::mlf::MlError;
use crate::picard::PicardError;
use crate::spectral::{Field, ModelParams, SpectralError, SpectralGrid};

pub use gronwall::{check_gronwall, left_inverse_order, semigroup_order};
pub use inequalities::{check_inequalities, yakupov_spot_check};
pub use oracle::{classical_oracle, courant_number, ORACLE_COURANT_LIMIT};
pub use solvers::{
    classical_limit, classical_mode_discrepancy, default_ceilings, manufactured_problem, manufactured_residual,
    picard_envelope, schwartz_persistence, stability_uniqueness, Manufactured, ManufacturedCase,
};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Picard(#[from] PicardError),
    #[error(transparent)]
    Linsolve(#[from] LinsolveError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error("classical oracle unstable at t = {t}: Courant number {courant:.3} exceeds {limit}")]
    OracleUnstable { t: f64, courant: f64, limit: f64 },
    #[error("{0}")]
    Setup(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    pub worst_margin: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub metadata: BTreeMap<String, Value>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, samples: usize, worst_margin: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            samples,
            worst_margin,
            tolerance,
            passed: worst_margin >= -tolerance,
            metadata: BTreeMap::new(),
        }
    }

    /// A check that could not run; the error is kept in the metadata.
    pub fn failed(name: impl Into<String>, err: &dyn std::fmt::Display) -> Self {
        Self::new(name, 0, f64::NEG_INFINITY, 0.0).with("error", err.to_string())
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }
}

/// Running minimum of signed margins, remembering where it occurred.
#[derive(Debug, Clone)]
struct Worst {
    margin: f64,
    count: usize,
    at: Value,
}

impl Worst {
    fn new() -> Self {
        Self { margin: f64::INFINITY, count: 0, at: Value::Null }
    }

    fn push(&mut self, margin: f64, at: impl FnOnce() -> Value) {
        self.count += 1;
        if self.margin.is_nan() {
            return;
        }
        if margin.is_nan() || margin < self.margin {
            self.margin = margin;
            self.at = at();
        }
    }

    fn merge(&mut self, other: Worst) {
        if other.count == 0 {
            return;
        }
        let at = other.at;
        self.push(other.margin, || at);
        self.count += other.count - 1;
    }

    fn report(self, name: &str, tolerance: f64) -> CheckReport {
        let margin = if self.count == 0 { 0.0 } else { self.margin };
        CheckReport::new(name, self.count, margin, tolerance).with("worst_at", self.at)
    }
}

/// Independent stream per check so that adding samples to one check does not
/// shift the others.
fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Trigonometric sum under Gaussian envelopes, with random coefficients.
pub fn random_smooth_field(grid: &SpectralGrid, rng: &mut ChaCha8Rng) -> Field {
    let terms: Vec<[f64; 5]> = (0..3)
        .map(|_| {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..3.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.7..2.0),
            ]
        })
        .collect();
    Field::from_fn(grid, |x| {
        terms.iter().map(|&[a, w, ph, c, s]| a * (w * x + ph).cos() * (-((x - c) / s).powi(2)).exp()).sum()
    })
}

/// Smooth random function of time on [0, 1] of the same family as the fields.
fn random_time_fn(rng: &mut ChaCha8Rng) -> impl Fn(f64) -> f64 {
    let offset = rng.gen_range(-1.0..1.0);
    let terms: Vec<[f64; 5]> = (0..3)
        .map(|_| {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..8.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.2..1.0),
            ]
        })
        .collect();
    move |t| {
        offset
            + terms.iter().map(|&[a, w, ph, c, s]| a * (w * t + ph).cos() * (-((t - c) / s).powi(2)).exp()).sum::<f64>()
    }
}

/// Settings of the full suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub samples: usize,
    /// Half-length and size of the spatial grid for the solver checks.
    pub half_length: f64,
    pub n_points: usize,
    pub dt: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 20240611, samples: 200, half_length: 32.0, n_points: 256, dt: 1.0 / 32.0 }
    }
}

/// Coefficients used throughout the solver checks; Re P > 0 on every mode.
pub fn reference_params(beta: f64, gamma: f64, t_final: f64) -> Result<ModelParams, VerifyError> {
    Ok(ModelParams::new(FracOrder::new(beta)?, 1.0, 0.5, 1.0, 0.3, 0.5, gamma, t_final)?)
}

fn gaussian(grid: &SpectralGrid, amplitude: f64, width: f64) -> Field {
    Field::from_fn(grid, |x| amplitude * (-(x / width).powi(2)).exp())
}

/// Runs every check; solver failures show up as failed reports.
pub fn run_suite(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let mut out = check_inequalities(cfg.seed, cfg.samples);
    out.extend(check_gronwall(cfg.seed, cfg.samples));
    out.push(yakupov_spot_check(cfg.seed, 2 * cfg.samples));
    out.extend(solver_checks(cfg));
    for r in &mut out {
        r.metadata.insert("seed".into(), cfg.seed.into());
    }
    out
}

fn solver_checks(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let grid = match SpectralGrid::new(cfg.half_length, cfg.n_points) {
        Ok(g) => g,
        Err(e) => return vec![CheckReport::failed("solver_checks", &e)],
    };
    let mut out = Vec::new();
    let mut run = |name: &str, f: &dyn Fn() -> Result<CheckReport, VerifyError>| {
        out.push(match f() {
            Ok(r) => r,
            Err(e) => CheckReport::failed(name, &e),
        })
    };
    let tg = |t: f64| TimeGrid::covering(0.0, t, cfg.dt).map_err(VerifyError::from);
    let coarse = |t: f64| TimeGrid::covering(0.0, t, 0.1).map_err(VerifyError::from);

    run("manufactured_linear", &|| {
        let p = reference_params(0.5, 0.0, 1.0)?;
        Ok(manufactured_residual(&Manufactured::new(ManufacturedCase::Linear), &p, &grid, &coarse(1.0)?))
    });
    run("manufactured_nonlinear", &|| {
        let p = reference_params(0.5, 0.5, 1.0)?;
        Ok(manufactured_residual(&Manufactured::new(ManufacturedCase::Nonlinear), &p, &grid, &coarse(1.0)?))
    });
    run("manufactured_trivial", &|| {
        let p = reference_params(0.5, 0.5, 1.0)?;
        let m = Manufactured { amplitude: 0.0, ..Manufactured::new(ManufacturedCase::Nonlinear) };
        let mut r = manufactured_residual(&m, &p, &grid, &coarse(1.0)?);
        r.name = "manufactured_trivial".into();
        Ok(r)
    });
    run("classical_limit_linear", &|| {
        let p = reference_params(1.0 - 1e-3, 0.0, 1.0)?;
        classical_limit(&p, &grid, &tg(1.0)?, &gaussian(&grid, 0.5, 2f64.sqrt()))
    });
    run("classical_limit_nonlinear", &|| {
        let p = reference_params(1.0 - 1e-3, 1.0, 1.0)?;
        classical_limit(&p, &grid, &tg(1.0)?, &gaussian(&grid, 0.5, 2f64.sqrt()))
    });
    run("uniqueness_deterministic", &|| {
        let p = reference_params(0.5, 1.0, 1.0)?;
        stability_uniqueness(&p, &grid, &tg(1.0)?, &gaussian(&grid, 0.5, 2f64.sqrt()), 0.0)
    });
    run("uniqueness_stability", &|| {
        let p = reference_params(0.5, 1.0, 1.0)?;
        stability_uniqueness(&p, &grid, &tg(1.0)?, &gaussian(&grid, 0.5, 2f64.sqrt()), 1e-6)
    });
    run("uniqueness_linear", &|| {
        let p = reference_params(0.5, 0.0, 1.0)?;
        stability_uniqueness(&p, &grid, &tg(1.0)?, &gaussian(&grid, 0.5, 2f64.sqrt()), 1e-6)
    });
    run("picard_envelope", &|| {
        let p = reference_params(0.5, 1.0, 1.0)?;
        picard_envelope(&p, &grid, &tg(1.0)?, &gaussian(&grid, 0.2, 2f64.sqrt()))
    });
    run("schwartz_persistence", &|| {
        let p = reference_params(0.5, 1.0, 1.0)?;
        let phi = gaussian(&grid, 0.5, 2f64.sqrt());
        let f = crate::linsolve::IntervalForcing::zero(&grid, tg(1.0)?.n_steps);
        let (traj, _) = crate::picard::solve_nonlinear(&phi, &f, &p, &grid, &tg(1.0)?, &Default::default())?;
        Ok(schwartz_persistence(&traj, &default_ceilings(&phi, 1000.0)))
    });
    out
}

/// Writes the reports as a pretty-printed JSON array.
pub fn write_report(path: &Path, reports: &[CheckReport]) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(reports).map_err(std::io::Error::other)?;
    std::fs::write(path, text + "\n")
}

#[cfg(test)]
mod tests;
