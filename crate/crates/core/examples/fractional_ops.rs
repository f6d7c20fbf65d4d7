//! Riemann-Liouville integral and L1 Caputo derivative against closed forms.

use fks::fracops::{caputo_derivative, gamma_fn, rl_integral, FracOrder, TimeGrid, TimeSeries};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let beta = 0.4;
    let order = FracOrder::caputo(beta)?;
    println!("{:>6} {:>14} {:>14}", "steps", "rl err", "caputo err");
    for steps in [16, 32, 64, 128, 256] {
        let tg = TimeGrid::new(0.0, 1.0 / steps as f64, steps)?;
        let f = TimeSeries::sample(tg, |t| t * t);
        // I^b t^2 = 2 t^{2+b} / Gamma(3+b),  D^b t^2 = 2 t^{2-b} / Gamma(3-b)
        let i_exact = 2.0 / gamma_fn(3.0 + beta)?;
        let d_exact = 2.0 / gamma_fn(3.0 - beta)?;
        let i_err = (rl_integral(&f, order).values()[steps] - i_exact).abs();
        let d_err = (caputo_derivative(&f, order)?.values()[steps] - d_exact).abs();
        println!("{steps:>6} {i_err:>14.3e} {d_err:>14.3e}");
    }
    Ok(())
}
