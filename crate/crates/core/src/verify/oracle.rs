//! Integrating-factor RK4 for the classical (beta = 1) equation with zero forcing.

use num_complex::Complex64;

use super::VerifyError;
use crate::fracops::TimeGrid;
use crate::spectral::{mode_symbol, nonlinear_term, Field, ModelParams};

/// Largest accepted h * k_max * max|u| * |gamma| per RK4 substep.
pub const ORACLE_COURANT_LIMIT: f64 = 1.0;

/// h * k_max * max|u| * |gamma|, k_max the largest retained wavenumber.
pub fn courant_number(u: &Field, gamma: f64, h: f64) -> f64 {
    let g = u.grid();
    let kmax = g.wavenumber(g.dealias_cutoff() as usize);
    h * kmax * u.max_abs() * gamma.abs()
}

fn nonlinearity(u: &Field, gamma: f64) -> Vec<Complex64> {
    nonlinear_term(u).coeffs().iter().map(|c| -gamma * c).collect()
}

/// u_t + L u + gamma u u_x = 0 by RK4 on e^{P t} u, sampled at the nodes of
/// `timegrid` with `substeps` RK4 steps per node interval.
pub fn classical_oracle(
    params: &ModelParams,
    phi: &Field,
    timegrid: &TimeGrid,
    substeps: usize,
) -> Result<Vec<Field>, VerifyError> {
    if substeps == 0 {
        return Err(VerifyError::Setup("substeps must be positive".into()));
    }
    let grid = phi.grid().clone();
    let n = grid.n_points();
    let h = timegrid.dt / substeps as f64;
    let p: Vec<Complex64> = (0..n).map(|idx| mode_symbol(params, &grid, idx)).collect();
    let e: Vec<Complex64> = p.iter().map(|&s| (-s * h).exp()).collect();
    let e2: Vec<Complex64> = p.iter().map(|&s| (-s * h / 2.0).exp()).collect();
    let gamma = params.gamma;
    let field = |c: Vec<Complex64>| Field::from_coeffs(&grid, c);

    let mut out = vec![phi.clone()];
    let mut u = phi.clone();
    for step in 0..timegrid.n_steps {
        for sub in 0..substeps {
            let courant = courant_number(&u, gamma, h);
            if courant > ORACLE_COURANT_LIMIT {
                let t = timegrid.node(step) + sub as f64 * h;
                return Err(VerifyError::OracleUnstable { t, courant, limit: ORACLE_COURANT_LIMIT });
            }
            let c0 = u.coeffs();
            let a: Vec<Complex64> = nonlinearity(&u, gamma).iter().map(|x| x * h).collect();
            let u2 = field((0..n).map(|i| e2[i] * (c0[i] + a[i] / 2.0)).collect())?;
            let b: Vec<Complex64> = nonlinearity(&u2, gamma).iter().map(|x| x * h).collect();
            let u3 = field((0..n).map(|i| e2[i] * c0[i] + b[i] / 2.0).collect())?;
            let c: Vec<Complex64> = nonlinearity(&u3, gamma).iter().map(|x| x * h).collect();
            let u4 = field((0..n).map(|i| e[i] * c0[i] + e2[i] * c[i]).collect())?;
            let d: Vec<Complex64> = nonlinearity(&u4, gamma).iter().map(|x| x * h).collect();
            u = field(
                (0..n)
                    .map(|i| e[i] * c0[i] + (e[i] * a[i] + 2.0 * e2[i] * (b[i] + c[i]) + d[i]) / 6.0)
                    .collect(),
            )?;
        }
        out.push(u.clone());
    }
    Ok(out)
}
