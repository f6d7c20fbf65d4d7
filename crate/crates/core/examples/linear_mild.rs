//! Linear mild solution of a single Fourier mode against E_beta(-P t^beta).

use num_complex::Complex64;

use fks::fracops::{FracOrder, TimeGrid};
use fks::linsolve::{build_propagators, solve_linear, IntervalForcing};
use fks::mlf::mittag_leffler;
use fks::mlf::MLParams;
use fks::spectral::{mode_symbol, Field, ModelParams, SpectralGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let beta = 0.7;
    let params = ModelParams::new(FracOrder::caputo(beta)?, 1.0, 0.5, 1.0, 0.3, 0.5, 0.0, 1.0)?;
    let grid = SpectralGrid::new(std::f64::consts::PI * 4.0, 64)?;
    let tg = TimeGrid::new(0.0, 0.05, 20)?;
    let idx = 3;
    let lambda = grid.wavenumber(idx);
    let phi = Field::from_fn(&grid, |x| (lambda * x).cos());
    let table = build_propagators(&params, &grid, &tg)?;
    let traj = solve_linear(&phi, &IntervalForcing::zero(&grid, tg.n_steps), &table, &tg)?;
    let p = mode_symbol(&params, &grid, idx);
    let ml = MLParams::new(beta, 1.0)?;
    println!("mode {idx}, lambda = {lambda:.4}, P = {:.4}{:+.4}i", p.re, p.im);
    for (n, t) in tg.nodes().enumerate().step_by(5) {
        let exact = mittag_leffler(ml, -p * t.powf(beta))? * phi.coeffs()[idx];
        let got: Complex64 = traj.fields[n].coeffs()[idx];
        println!("t = {t:.2}  |u_hat| = {:.6e}  error = {:.2e}", got.norm(), (got - exact).norm() / exact.norm());
    }
    Ok(())
}
