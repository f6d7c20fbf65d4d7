//! Large-|z| expansion: algebraic series plus the exponential contributions
//! of the poles s = z^{1/alpha} e^{2 pi i k / alpha} on the principal sheet.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Branch, MLParams, MlEval};
use crate::fracops::{ln_abs_gamma, recip_gamma};

/// r-th algebraic term z^{-r} / Gamma(beta - alpha r) given z^{-r}.
fn algebraic_term(p: MLParams, r: usize, inv_pow: Complex64, log_r: f64, theta: f64) -> Complex64 {
    let x = p.beta_param() - p.alpha() * r as f64;
    let rg = recip_gamma(x);
    if rg.is_finite() && inv_pow.is_finite() && inv_pow.norm() > 1e-290 {
        return inv_pow * rg;
    }
    let (lg, sign) = ln_abs_gamma(x);
    if sign == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(sign * (-(r as f64) * log_r - lg).exp(), -(r as f64) * theta)
}

/// -sum_{r=1}^{n} z^{-r} / Gamma(beta - alpha r).
pub(super) fn algebraic_sum(p: MLParams, z: Complex64, n_terms: usize) -> Complex64 {
    let inv = z.inv();
    let (log_r, theta) = (z.norm().ln(), z.arg());
    let mut inv_pow = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 1..=n_terms {
        inv_pow *= inv;
        acc -= algebraic_term(p, r, inv_pow, log_r, theta);
    }
    acc
}

/// Poles of s^{alpha-beta} / (s^alpha - z) on the principal sheet.
pub(super) fn principal_poles(alpha: f64, z: Complex64) -> Vec<Complex64> {
    let theta = z.arg();
    let radius = z.norm().powf(1.0 / alpha);
    let kmin = (-alpha / 2.0 - theta / (2.0 * PI)).ceil() as i64;
    let kmax = (alpha / 2.0 - theta / (2.0 * PI)).floor() as i64;
    (kmin..=kmax)
        .filter_map(|k| {
            let phase = (theta + 2.0 * PI * k as f64) / alpha;
            // poles exactly on the branch cut belong to neither sheet side
            (phase.abs() < PI).then(|| Complex64::from_polar(radius, phase))
        })
        .collect()
}

/// sum over principal poles of (1/alpha) s^{1-beta} e^s.
pub(super) fn exponential_part(p: MLParams, z: Complex64) -> Complex64 {
    principal_poles(p.alpha(), z)
        .into_iter()
        .map(|s| (s.ln() * (1.0 - p.beta_param()) + s).exp() / p.alpha())
        .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
}

/// Optimally truncated expansion.
///
/// Uses the envelope |1/Gamma(beta - alpha r)| <= Gamma(1 - beta + alpha r) / pi,
/// which is unimodal in r, to pick the truncation point; the envelope at the
/// first omitted index is the error estimate.
pub(super) fn adaptive(p: MLParams, z: Complex64, max_terms: usize) -> MlEval {
    let (alpha, beta) = (p.alpha(), p.beta_param());
    if alpha == 1.0 && beta.fract() == 0.0 {
        return terminating(p, z);
    }
    let inv = z.inv();
    let (log_r, theta) = (z.norm().ln(), z.arg());
    let envelope = |r: usize| {
        let x = 1.0 - beta + alpha * r as f64;
        let lg = if x > 0.0 { ln_abs_gamma(x).0 } else { 0.0 };
        (lg - r as f64 * log_r - PI.ln()).exp()
    };
    let mut inv_pow = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut prev_env = f64::INFINITY;
    let mut err = f64::INFINITY;
    for r in 1..=max_terms {
        let env = envelope(r);
        let settled = 1.0 - beta + alpha * r as f64 > 2.0;
        if settled && env > prev_env {
            err = prev_env;
            break;
        }
        inv_pow *= inv;
        acc -= algebraic_term(p, r, inv_pow, log_r, theta);
        prev_env = env;
        err = env;
    }
    let value = acc + exponential_part(p, z);
    let est_abs_err = err + f64::EPSILON * value.norm();
    MlEval { value, branch: Branch::Asymptotic, est_abs_err }
}

/// For alpha = 1 and integer beta the coefficients 1/Gamma(beta - r) vanish
/// for r >= beta, so the expansion is a finite sum plus e^z z^{1-beta}
/// (no branch cut is involved, so this holds on the negative axis too).
fn terminating(p: MLParams, z: Complex64) -> MlEval {
    let n = (p.beta_param() - 1.0).max(0.0) as usize;
    let value = algebraic_sum(p, z, n) + z.powf(1.0 - p.beta_param()) * z.exp();
    MlEval { value, branch: Branch::Asymptotic, est_abs_err: 4.0 * (n as f64 + 1.0) * f64::EPSILON * value.norm() }
}
