//! beta -> 1 against the exponential propagator and the RK4 oracle.

use fks::fracops::{FracOrder, TimeGrid};
use fks::spectral::{Field, ModelParams, SpectralGrid};
use fks::verify::classical_limit;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = SpectralGrid::new(32.0, 256)?;
    let tg = TimeGrid::covering(0.0, 1.0, 1.0 / 32.0)?;
    let phi = Field::from_fn(&grid, |x| 0.5 * (-x * x / 2.0).exp());
    for gamma in [0.0, 1.0] {
        for beta in [0.999, 0.9999] {
            let params = ModelParams::new(FracOrder::caputo(beta)?, 1.0, 0.5, 1.0, 0.3, 0.5, gamma, 1.0)?;
            let r = classical_limit(&params, &grid, &tg, &phi)?;
            println!("gamma = {gamma}, beta = {beta}: {} margin {:.3e} {}", r.name, r.worst_margin, if r.passed { "pass" } else { "FAIL" });
        }
    }
    Ok(())
}
