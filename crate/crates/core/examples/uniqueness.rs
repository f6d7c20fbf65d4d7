//! Twin runs: bitwise reproducibility and the perturbation growth bound.

use fks::fracops::{FracOrder, TimeGrid};
use fks::spectral::{Field, ModelParams, SpectralGrid};
use fks::verify::stability_uniqueness;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = SpectralGrid::new(32.0, 256)?;
    let tg = TimeGrid::covering(0.0, 1.0, 1.0 / 32.0)?;
    let phi = Field::from_fn(&grid, |x| 0.5 * (-x * x).exp());
    for (gamma, delta) in [(1.0, 0.0), (1.0, 1e-6), (0.0, 1e-6)] {
        let params = ModelParams::new(FracOrder::caputo(0.6)?, 1.0, 0.5, 1.0, 0.3, 0.5, gamma, 1.0)?;
        let r = stability_uniqueness(&params, &grid, &tg, &phi, delta)?;
        println!("{:<26} margin {:>10.3e} {}", r.name, r.worst_margin, serde_json::to_string(&r.metadata)?);
    }
    Ok(())
}
