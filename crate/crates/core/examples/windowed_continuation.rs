//! Fixed windows stitched through the Caputo memory term versus one window.

use fks::fracops::{FracOrder, TimeGrid};
use fks::linsolve::IntervalForcing;
use fks::picard::{solve_nonlinear, PicardConfig, WindowMode};
use fks::spectral::{l2_norm2, Field, ModelParams, SpectralGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ModelParams::new(FracOrder::caputo(0.5)?, 1.0, 0.0, 1.0, 0.0, 0.5, 1.0, 1.0)?;
    let grid = SpectralGrid::new(32.0, 256)?;
    let tg = TimeGrid::covering(0.0, 1.0, 1.0 / 32.0)?;
    let phi = Field::from_fn(&grid, |x| 0.4 * (-x * x).exp());
    let zero = IntervalForcing::zero(&grid, tg.n_steps);
    let base = PicardConfig { tol: 1e-12, ..Default::default() };
    let (single, _) = solve_nonlinear(&phi, &zero, &params, &grid, &tg, &base)?;
    for mode in [WindowMode::Fixed(0.5), WindowMode::Fixed(0.25), WindowMode::Auto] {
        let cfg = PicardConfig { window_mode: mode, ..base };
        let (traj, rep) = solve_nonlinear(&phi, &zero, &params, &grid, &tg, &cfg)?;
        let gap = l2_norm2(&traj.last().add_scaled(-1.0, single.last())?).sqrt() / l2_norm2(single.last()).sqrt();
        println!("{mode:?}: {} windows, {} iterates, relative gap at T {gap:.3e}", rep.windows.len(), rep.iterations);
    }
    Ok(())
}
