use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::{ConfigError, ForcingSpec, InitialCondition, RunConfig};
use super::CliError;
use crate::fracops::{FracOrder, TimeGrid};
use crate::linsolve::{build_propagators, solve_linear, IntervalForcing, Trajectory};
use crate::picard::{solve_nonlinear, ConvergenceReport, PicardError};
use crate::spectral::{
    check_boundary_decay, l2_norm2, norm2_pair, read_snapshot, semi_norm, weighted_sup, write_snapshot, Field,
    ModelParams, SpectralGrid,
};
use crate::verify::{manufactured_problem, Manufactured};

#[derive(Debug, Clone, Serialize)]
pub struct ManifestFile {
    pub name: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub setup_s: f64,
    pub solve_s: f64,
    pub output_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub seed: u64,
    /// ok, diverged, watchdog or error.
    pub status: String,
    /// Set when the run stopped early and the outputs are incomplete.
    pub partial: bool,
    pub config: BTreeMap<String, String>,
    pub dt_effective: f64,
    pub n_steps: usize,
    pub solver: String,
    pub picard_iterations: Option<usize>,
    /// Relative L2 error against the manufactured solution, max over t > 0.
    pub final_error: Option<f64>,
    pub files: Vec<ManifestFile>,
    pub timings: Timings,
}

/// Everything a solve produced, before it is written out.
pub struct SolveOutcome {
    pub trajectory: Trajectory,
    pub report: Option<ConvergenceReport>,
    pub final_error: Option<f64>,
}

pub(super) struct Prepared {
    pub params: ModelParams,
    pub grid: SpectralGrid,
    pub timegrid: TimeGrid,
    pub phi: Field,
    pub forcing: IntervalForcing,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(ConfigError::Invalid(msg.into()))
}

fn initial_field(ic: &InitialCondition, grid: &SpectralGrid) -> Result<Field, CliError> {
    Ok(match *ic {
        InitialCondition::Gaussian { amplitude, width, center } => {
            Field::from_fn(grid, |x| amplitude * (-((x - center) / width).powi(2)).exp())
        }
        InitialCondition::CosinePacket { amplitude, wavenumber, envelope_width } => {
            Field::from_fn(grid, |x| amplitude * (wavenumber * x).cos() * (-(x / envelope_width).powi(2)).exp())
        }
        InitialCondition::File { ref path } => {
            let (xs, us) = read_snapshot(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            let nodes = grid.nodes();
            let tol = 1e-9 * grid.half_length();
            if xs.len() != nodes.len() || xs.iter().zip(&nodes).any(|(a, b)| (a - b).abs() > tol) {
                return Err(invalid(format!(
                    "{}: {} rows do not match the {} grid nodes",
                    path.display(),
                    xs.len(),
                    nodes.len()
                )));
            }
            Field::from_samples(grid, us).map_err(|e| invalid(e.to_string()))?
        }
    })
}

/// Rows `t, f(x_0), ..., f(x_{N-1})`; a leading non-numeric row is a header.
fn read_forcing_table(path: &Path, n: usize) -> Result<Vec<(f64, Vec<f64>)>, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut rows: Vec<(f64, Vec<f64>)> = Vec::new();
    let bad = |line: usize, msg: String| invalid(format!("{}:{line}: {msg}", path.display()));
    for (i, raw) in text.lines().enumerate() {
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let vals: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let vals = match vals {
            Ok(v) => v,
            Err(_) if rows.is_empty() && i == 0 => continue,
            Err(e) => return Err(bad(i + 1, e.to_string())),
        };
        if vals.len() != n + 1 {
            return Err(bad(i + 1, format!("expected {} columns, got {}", n + 1, vals.len())));
        }
        if rows.last().is_some_and(|(t, _)| *t >= vals[0]) {
            return Err(bad(i + 1, "times must increase".into()));
        }
        rows.push((vals[0], vals[1..].to_vec()));
    }
    if rows.is_empty() {
        return Err(invalid(format!("{}: no forcing rows", path.display())));
    }
    Ok(rows)
}

fn interpolate(rows: &[(f64, Vec<f64>)], t: f64) -> Vec<f64> {
    let k = rows.partition_point(|(s, _)| *s <= t);
    if k == 0 {
        return rows[0].1.clone();
    }
    if k == rows.len() {
        return rows[k - 1].1.clone();
    }
    let (t0, a) = &rows[k - 1];
    let (t1, b) = &rows[k];
    let w = (t - t0) / (t1 - t0);
    a.iter().zip(b).map(|(x, y)| x + w * (y - x)).collect()
}

pub(super) fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    let beta = FracOrder::caputo(cfg.beta).map_err(|e| invalid(e.to_string()))?;
    let params = ModelParams::new(beta, cfg.a, cfg.b, cfg.c, cfg.d, cfg.k, cfg.gamma, cfg.t_final)
        .map_err(|e| invalid(e.to_string()))?;
    let grid = SpectralGrid::new(cfg.half_length, cfg.n_points).map_err(|e| invalid(e.to_string()))?;
    let timegrid = TimeGrid::covering(0.0, cfg.t_final, cfg.dt).map_err(|e| invalid(e.to_string()))?;
    let (phi, forcing) = match &cfg.forcing {
        ForcingSpec::Manufactured { case, amplitude } => {
            let m = Manufactured { case: *case, amplitude: *amplitude };
            manufactured_problem(&m, &params, &grid, &timegrid).map_err(|e| CliError::Solver(e.to_string()))?
        }
        other => {
            let ic = cfg.ic.as_ref().ok_or(CliError::Config(ConfigError::Missing("ic.kind")))?;
            let phi = initial_field(ic, &grid)?;
            let forcing = match other {
                ForcingSpec::File { path } => {
                    let rows = read_forcing_table(path, grid.n_points())?;
                    IntervalForcing::from_midpoints(&grid, &timegrid, |t| {
                        Field::from_samples(&grid, interpolate(&rows, t)).expect("row width checked")
                    })
                    .map_err(|e| CliError::Solver(e.to_string()))?
                }
                _ => IntervalForcing::zero(&grid, timegrid.n_steps),
            };
            (phi, forcing)
        }
    };
    Ok(Prepared { params, grid, timegrid, phi, forcing })
}

pub(super) fn solve_prepared(cfg: &RunConfig, p: &Prepared) -> Result<SolveOutcome, CliError> {
    let (trajectory, report) = if cfg.gamma == 0.0 && cfg.fast_linear {
        check_boundary_decay(&p.phi, cfg.picard.decay_tol)
            .map_err(|e| CliError::Watchdog(format!("t = 0: {e}")))?;
        let table = build_propagators(&p.params, &p.grid, &p.timegrid).map_err(|e| CliError::Solver(e.to_string()))?;
        let traj = solve_linear(&p.phi, &p.forcing, &table, &p.timegrid).map_err(|e| CliError::Solver(e.to_string()))?;
        for (t, u) in p.timegrid.nodes().zip(&traj.fields) {
            check_boundary_decay(u, cfg.picard.decay_tol).map_err(|e| CliError::Watchdog(format!("t = {t}: {e}")))?;
            let v = norm2_pair(u);
            if !(v <= cfg.picard.ceiling) {
                return Err(CliError::Watchdog(format!("t = {t}: norm {v:.3e} exceeds ceiling {:.3e}", cfg.picard.ceiling)));
            }
        }
        (traj, None)
    } else {
        match solve_nonlinear(&p.phi, &p.forcing, &p.params, &p.grid, &p.timegrid, &cfg.picard) {
            Ok((traj, rep)) => (traj, Some(rep)),
            Err(e @ PicardError::Diverged { .. }) => {
                let msg = e.to_string();
                let PicardError::Diverged { report, .. } = e else { unreachable!() };
                return Err(CliError::Diverged { msg, report });
            }
            Err(e @ (PicardError::Watchdog { .. } | PicardError::Ceiling { .. })) => {
                return Err(CliError::Watchdog(e.to_string()))
            }
            Err(e) => return Err(CliError::Solver(e.to_string())),
        }
    };
    let final_error = match &cfg.forcing {
        ForcingSpec::Manufactured { case, amplitude } => Some(
            Manufactured { case: *case, amplitude: *amplitude }
                .error(&trajectory)
                .map_err(|e| CliError::Solver(e.to_string()))?,
        ),
        _ => None,
    };
    Ok(SolveOutcome { trajectory, report, final_error })
}

/// Solves without writing anything.
pub fn solve_config(cfg: &RunConfig) -> Result<SolveOutcome, CliError> {
    solve_prepared(cfg, &prepare(cfg)?)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_norms(path: &Path, cfg: &RunConfig, traj: &Trajectory) -> Result<(), CliError> {
    let mut w = BufWriter::new(fs::File::create(path).map_err(io_err(path))?);
    let mut header = vec!["t".to_string(), "l2".into(), "norm2_pair".into()];
    header.extend(cfg.output.seminorms.iter().map(|(m, s)| format!("seminorm_{m}_{s}")));
    header.extend(cfg.output.sup_pairs.iter().map(|(k, n)| format!("sup_x{k}_d{n}")));
    let mut text = header.join(",") + "\n";
    for (t, u) in traj.timegrid.nodes().zip(&traj.fields) {
        let mut row = vec![num(t), num(l2_norm2(u).sqrt()), num(norm2_pair(u))];
        row.extend(cfg.output.seminorms.iter().map(|&(m, s)| num(semi_norm(u, m, s))));
        row.extend(cfg.output.sup_pairs.iter().map(|&(k, n)| num(weighted_sup(u, k, n))));
        text += &row.join(",");
        text.push('\n');
    }
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(io_err(path))
}

/// Node index closest to `t`.
fn nearest_node(tg: &TimeGrid, t: f64) -> usize {
    (((t - tg.t0) / tg.dt).round().max(0.0) as usize).min(tg.n_steps)
}

pub fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t}.csv")
}

struct Writer {
    dir: PathBuf,
    files: Vec<ManifestFile>,
}

impl Writer {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn record(&mut self, name: &str) -> Result<(), CliError> {
        let path = self.path(name);
        let bytes = fs::metadata(&path).map_err(io_err(&path))?.len();
        self.files.push(ManifestFile { name: name.to_string(), bytes });
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let path = self.path(name);
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io { path: path.clone(), source: e.into() })?;
        fs::write(&path, text + "\n").map_err(io_err(&path))?;
        self.record(name)
    }
}

fn config_map(cfg: &RunConfig) -> BTreeMap<String, String> {
    cfg.emit()
        .lines()
        .filter_map(|l| l.split_once(" = ").map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}

/// Solves and writes norms.csv, the snapshots, convergence.json and
/// manifest.json into `output.dir`. On divergence or a watchdog trip the
/// manifest is still written, marked partial, before the error is returned.
pub fn run_solve(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let t_setup = Instant::now();
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut writer = Writer { dir, files: Vec::new() };
    let resolved = cfg.emit();
    let resolved_path = writer.path("config.resolved");
    fs::write(&resolved_path, &resolved).map_err(io_err(&resolved_path))?;
    writer.record("config.resolved")?;

    let prepared = prepare(cfg)?;
    let mut timings = Timings { setup_s: t_setup.elapsed().as_secs_f64(), ..Timings::default() };
    let mut manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        status: "ok".into(),
        partial: false,
        config: config_map(cfg),
        dt_effective: prepared.timegrid.dt,
        n_steps: prepared.timegrid.n_steps,
        solver: if cfg.gamma == 0.0 && cfg.fast_linear { "linear" } else { "picard" }.into(),
        picard_iterations: None,
        final_error: None,
        files: Vec::new(),
        timings: Timings::default(),
    };

    let t_solve = Instant::now();
    let result = solve_prepared(cfg, &prepared);
    timings.solve_s = t_solve.elapsed().as_secs_f64();

    let outcome = match result {
        Ok(o) => o,
        Err(err) => {
            manifest.partial = true;
            manifest.status = match &err {
                CliError::Diverged { .. } => "diverged",
                CliError::Watchdog(_) => "watchdog",
                _ => "error",
            }
            .into();
            if let CliError::Diverged { report, .. } = &err {
                writer.json("convergence.json", report.as_ref())?;
            }
            manifest.timings = timings;
            manifest.files = writer.files;
            let path = cfg.output.dir.join("manifest.json");
            let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            fs::write(&path, text + "\n").map_err(io_err(&path))?;
            return Err(err);
        }
    };

    let t_out = Instant::now();
    let traj = &outcome.trajectory;
    if cfg.output.norms {
        write_norms(&writer.path("norms.csv"), cfg, traj)?;
        writer.record("norms.csv")?;
    }
    for &t in &cfg.output.snapshots {
        let name = snapshot_name(t);
        let path = writer.path(&name);
        write_snapshot(&path, &traj.fields[nearest_node(&traj.timegrid, t)])
            .map_err(|e| CliError::Io { path: path.clone(), source: std::io::Error::other(e.to_string()) })?;
        writer.record(&name)?;
    }
    if cfg.output.report {
        match &outcome.report {
            Some(r) => writer.json("convergence.json", r)?,
            None => writer.json("convergence.json", &serde_json::json!({ "solver": "linear", "iterations": 0 }))?,
        }
    }
    timings.output_s = t_out.elapsed().as_secs_f64();
    manifest.picard_iterations = outcome.report.as_ref().map(|r| r.iterations);
    manifest.final_error = outcome.final_error;
    manifest.timings = timings;
    manifest.files = writer.files;
    let path = cfg.output.dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(manifest)
}

/// Relative L2 distance of `a` from `b`.
pub(super) fn relative_gap(a: &Field, b: &Field) -> f64 {
    let d = a.add_scaled(-1.0, b).map(|f| l2_norm2(&f).sqrt()).unwrap_or(f64::NAN);
    let s = l2_norm2(b).sqrt();
    if s > 0.0 {
        d / s
    } else {
        d
    }
}
