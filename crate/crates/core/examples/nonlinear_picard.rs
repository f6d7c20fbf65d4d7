//! Picard iteration for the full equation from a Gaussian.

use fks::fracops::{FracOrder, TimeGrid};
use fks::linsolve::IntervalForcing;
use fks::picard::{solve_nonlinear, PicardConfig};
use fks::spectral::{norm2_pair, Field, ModelParams, SpectralGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ModelParams::new(FracOrder::caputo(0.6)?, 1.0, 0.5, 1.0, 0.3, 0.5, 1.0, 1.0)?;
    let grid = SpectralGrid::new(32.0, 256)?;
    let tg = TimeGrid::covering(0.0, 1.0, 1.0 / 32.0)?;
    let phi = Field::from_fn(&grid, |x| 0.5 * (-x * x).exp());
    let zero = IntervalForcing::zero(&grid, tg.n_steps);
    let (traj, report) = solve_nonlinear(&phi, &zero, &params, &grid, &tg, &PicardConfig::default())?;
    let w = &report.windows[0];
    println!("{:?} after {} iterates, K_fit = {:?}", w.stop_reason, w.iterations, w.k_fit);
    for (i, d) in w.d.iter().enumerate() {
        println!("d_{:<2} = {d:.3e}", i + 1);
    }
    println!("||u||^2 + ||u_xx||^2 at T: {:.6}", norm2_pair(traj.last()));
    Ok(())
}
