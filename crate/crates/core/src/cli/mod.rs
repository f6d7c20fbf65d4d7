//! Command line front end: `fks solve | mlf | verify | refine`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 divergence or solver
//! failure, 3 decay watchdog or norm ceiling, 4 I/O error, 64 usage or
//! configuration error.

mod config;
mod run;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub use config::{parse_config, ConfigError, ForcingSpec, InitialCondition, OutputConfig, RunConfig};
pub use run::{run_solve, snapshot_name, solve_config, ManifestFile, RunManifest, SolveOutcome, Timings};

use crate::mlf::{mittag_leffler, MLParams};
use crate::picard::ConvergenceReport;
use crate::verify::{run_suite, write_report, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;
pub const EXIT_WATCHDOG: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{msg}")]
    Diverged { msg: String, report: Box<ConvergenceReport> },
    #[error("watchdog: {0}")]
    Watchdog(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Diverged { .. } | CliError::Solver(_) => EXIT_DIVERGED,
            CliError::Watchdog(_) => EXIT_WATCHDOG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fks", version, about = "Time-fractional Kuramoto-Sivashinsky solver and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the problem described by a config file.
    Solve { config: PathBuf },
    /// Print E_{alpha,beta}(re + i im) to 17 significant digits.
    #[command(allow_negative_numbers = true)]
    Mlf { alpha: f64, beta: f64, re: f64, #[arg(default_value_t = 0.0)] im: f64 },
    /// Run the verification suite and write a JSON report.
    Verify {
        #[arg(long, default_value_t = SuiteConfig::default().seed)]
        seed: u64,
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
        #[arg(long, default_value_t = SuiteConfig::default().samples)]
        samples: usize,
    },
    /// Solve at dt, dt/2 and dt/4 and print observed orders.
    Refine { config: PathBuf },
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// `x` to 17 significant digits, positional when that stays readable.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..16).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        format!("{x:.16e}")
    }
}

pub fn mlf_line(alpha: f64, beta: f64, z: Complex64) -> Result<String, CliError> {
    let p = MLParams::new(alpha, beta).map_err(|e| CliError::Usage(e.to_string()))?;
    let v = mittag_leffler(p, z).map_err(|e| CliError::Solver(e.to_string()))?;
    Ok(if z.im == 0.0 && v.im == 0.0 {
        format_sig17(v.re)
    } else {
        format!("{} {}", format_sig17(v.re), format_sig17(v.im))
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RefineRow {
    pub dt: f64,
    /// Manufactured error, or the relative gap to the next finer run at T.
    pub error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefineReport {
    pub measure: String,
    pub rows: Vec<RefineRow>,
    pub orders: Vec<f64>,
}

/// Runs dt, dt/2 and dt/4. With manufactured forcing the errors are exact;
/// otherwise successive runs are compared at the final time.
pub fn refine(cfg: &RunConfig) -> Result<RefineReport, CliError> {
    let mut outcomes = Vec::new();
    for k in 0..3 {
        let mut c = cfg.clone();
        c.dt = cfg.dt / f64::from(1u32 << k);
        outcomes.push((c.dt, solve_config(&c)?));
    }
    let manufactured = outcomes.iter().all(|(_, o)| o.final_error.is_some());
    let rows: Vec<RefineRow> = if manufactured {
        outcomes.iter().map(|(dt, o)| RefineRow { dt: *dt, error: o.final_error }).collect()
    } else {
        (0..outcomes.len())
            .map(|i| RefineRow {
                dt: outcomes[i].0,
                error: outcomes
                    .get(i + 1)
                    .map(|next| run::relative_gap(outcomes[i].1.trajectory.last(), next.1.trajectory.last())),
            })
            .collect()
    };
    let errs: Vec<f64> = rows.iter().filter_map(|r| r.error).collect();
    let orders = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let measure = if manufactured { "manufactured_error" } else { "successive_gap_at_T" };
    Ok(RefineReport { measure: measure.into(), rows, orders })
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Solve { config } => {
            let cfg = load_config(&config)?;
            let m = run_solve(&cfg)?;
            println!("wrote {} files to {}", m.files.len() + 1, cfg.output.dir.display());
            if let Some(e) = m.final_error {
                println!("manufactured error {}", format_sig17(e));
            }
            Ok(EXIT_OK)
        }
        Command::Mlf { alpha, beta, re, im } => {
            println!("{}", mlf_line(alpha, beta, Complex64::new(re, im))?);
            Ok(EXIT_OK)
        }
        Command::Verify { seed, out, samples } => {
            let reports = run_suite(&SuiteConfig { seed, samples, ..SuiteConfig::default() });
            for r in &reports {
                let tag = if r.passed { "PASS" } else { "FAIL" };
                println!("{tag} {:<28} margin {:>12.4e} tol {:.1e}", r.name, r.worst_margin, r.tolerance);
            }
            write_report(&out, &reports).map_err(|source| CliError::Io { path: out.clone(), source })?;
            Ok(if reports.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
        Command::Refine { config } => {
            let cfg = load_config(&config)?;
            let rep = refine(&cfg)?;
            println!("{}", rep.measure);
            for r in &rep.rows {
                match r.error {
                    Some(e) => println!("dt {:<12} {}", r.dt, format_sig17(e)),
                    None => println!("dt {:<12} -", r.dt),
                }
            }
            for o in &rep.orders {
                println!("order {o:.4}");
            }
            fs::create_dir_all(&cfg.output.dir)
                .map_err(|source| CliError::Io { path: cfg.output.dir.clone(), source })?;
            let path = cfg.output.dir.join("refine.json");
            let text = serde_json::to_string_pretty(&rep).expect("report serializes");
            fs::write(&path, text + "\n").map_err(|source| CliError::Io { path, source })?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fks: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests;
