//! Spectral derivatives, the dealiased product term and weighted norms of a Gaussian.

use fks::spectral::{nonlinear_term, semi_norm, spectral_derivative, weighted_sup, Field, SpectralGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = SpectralGrid::new(16.0, 128)?;
    let u = Field::from_fn(&grid, |x| (-x * x).exp());
    let err = |f: &Field, g: &dyn Fn(f64) -> f64| {
        f.samples().iter().enumerate().map(|(j, v)| (v - g(grid.node(j))).abs()).fold(0.0, f64::max)
    };
    let d1 = spectral_derivative(&u, 1);
    let d2 = spectral_derivative(&u, 2);
    println!("d/dx   max error {:.2e}", err(&d1, &|x| -2.0 * x * (-x * x).exp()));
    println!("d2/dx2 max error {:.2e}", err(&d2, &|x| (4.0 * x * x - 2.0) * (-x * x).exp()));
    println!("u u_x  max error {:.2e}", err(&nonlinear_term(&u), &|x| -2.0 * x * (-2.0 * x * x).exp()));
    for (m, s) in [(0, 0), (1, 1), (2, 2), (3, 3)] {
        println!("|||u|||_{m},{s}^2 = {:.10}", semi_norm(&u, m, s));
    }
    println!("sup |x| |u_x| = {:.10}", weighted_sup(&u, 1, 1));
    Ok(())
}
