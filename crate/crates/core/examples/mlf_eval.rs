//! Mittag-Leffler values across the dispatcher's branches.

use num_complex::Complex64;

use fks::mlf::{evaluate, MLParams, MlConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = MlConfig::default();
    let cases = [
        (1.0, 1.0, Complex64::new(1.0, 0.0)),
        (0.5, 1.0, Complex64::new(1.0, 0.0)),
        (0.5, 1.0, Complex64::new(-30.0, 0.0)),
        (0.8, 1.8, Complex64::new(-50.0, 20.0)),
        (1.5, 1.0, Complex64::new(-8.0, 0.0)),
        (0.6, 0.6, Complex64::from_polar(200.0, 2.5)),
    ];
    println!("{:>5} {:>5} {:>22} {:>24} {:>24} {:>10} {:>9}", "alpha", "beta", "z", "re", "im", "branch", "err");
    for (alpha, beta, z) in cases {
        let e = evaluate(MLParams::new(alpha, beta)?, z, &cfg)?;
        println!(
            "{alpha:>5} {beta:>5} {:>22} {:>24.16e} {:>24.16e} {:>10} {:>9.1e}",
            format!("{:.3}{:+.3}i", z.re, z.im),
            e.value.re,
            e.value.im,
            format!("{:?}", e.branch),
            e.est_abs_err
        );
    }
    Ok(())
}
