//! Taylor series of E_{alpha,beta}(z) in double precision (with a
//! cancellation certificate) and in MPFR extended precision.

use num_complex::Complex64;
use rug::{Complex, Float};

use super::{Branch, MLParams, MlError, MlEval};
use crate::fracops::{ln_abs_gamma, recip_gamma, GAMMA_MAX_ARG};

const EPS: f64 = f64::EPSILON;

/// Double-precision series with Neumaier summation.
///
/// The returned error estimate accounts for the rounding of every term
/// (k multiplications for z^k plus the reciprocal gamma), so it grows with
/// the cancellation ratio sum|t_k| / |E|.
pub(super) fn series_f64(p: MLParams, z: Complex64, max_terms: usize) -> MlEval {
    let (alpha, beta) = (p.alpha(), p.beta_param());
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    let mut abs_weighted = 0.0;
    let mut quiet = 0;
    let log_r = z.norm().ln();
    let theta = z.arg();
    let mut converged = false;
    for k in 0..max_terms {
        let x = alpha * k as f64 + beta;
        let term = if x <= GAMMA_MAX_ARG - 1.0 && power.norm() < 1e290 {
            power * recip_gamma(x)
        } else {
            let (lg, sign) = ln_abs_gamma(x);
            if sign == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(sign * (k as f64 * log_r - lg).exp(), k as f64 * theta)
            }
        };
        let mag = term.norm();
        if !mag.is_finite() {
            break;
        }
        abs_weighted += mag * (k as f64 + 6.0);
        // Neumaier compensated addition, componentwise
        let (s_re, c_re) = two_sum(sum.re, term.re);
        let (s_im, c_im) = two_sum(sum.im, term.im);
        sum = Complex64::new(s_re, s_im);
        comp += Complex64::new(c_re, c_im);
        let total = (sum + comp).norm();
        // the tail is geometric once the term ratio |z| / (alpha k)^alpha drops below 1/2
        let ratio_small = k > 0 && log_r - alpha * (alpha * k as f64 + beta).max(1.0).ln() < -0.7;
        if mag <= 0.25 * EPS * total && ratio_small {
            quiet += 1;
            if quiet >= 2 {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
        power *= z;
    }
    let value = sum + comp;
    let est_abs_err = if converged { EPS * abs_weighted + EPS * value.norm() } else { f64::INFINITY };
    MlEval { value, branch: Branch::Series, est_abs_err }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Series evaluated in MPFR. The working precision starts from the peak term
/// magnitude and is raised until at least 100 bits survive the cancellation
/// between the peak and the sum.
pub(super) fn series_extended(
    p: MLParams,
    z: Complex64,
    max_terms: usize,
) -> Result<Complex64, MlError> {
    let (alpha, beta) = (p.alpha(), p.beta_param());
    let r = z.norm();
    if r == 0.0 {
        return Ok(Complex64::new(recip_gamma(beta), 0.0));
    }
    let log_r = r.ln();
    let mut peak = 0.0_f64;
    for k in 0..=max_terms {
        let (lg, sign) = ln_abs_gamma(alpha * k as f64 + beta);
        if sign != 0.0 {
            peak = peak.max(k as f64 * log_r - lg);
        }
    }
    let peak_bits = peak.max(0.0) / std::f64::consts::LN_2;
    let mut prec = (128.0 + peak_bits).ceil() as u32;
    for _ in 0..4 {
        let sum = series_at_precision(alpha, beta, z, max_terms, peak, prec)?;
        let (re, im) = sum.into_real_imag();
        let v = Complex64::new(re.to_f64(), im.to_f64());
        let norm = v.norm();
        // a sum below the f64 range cannot be resolved further
        if !(norm > 0.0 && norm.is_finite()) {
            return Ok(v);
        }
        let lost = peak_bits - norm.log2();
        if f64::from(prec) - lost >= 100.0 {
            return Ok(v);
        }
        prec = ((lost + 128.0).ceil() as u32).max(prec + 64);
    }
    Err(MlError::NotConverged { terms: max_terms })
}

fn series_at_precision(
    alpha: f64,
    beta: f64,
    z: Complex64,
    max_terms: usize,
    peak: f64,
    prec: u32,
) -> Result<Complex, MlError> {
    let log_r = z.norm().ln();
    let a = Float::with_val(prec, alpha);
    let b = Float::with_val(prec, beta);
    let zz = Complex::with_val(prec, (z.re, z.im));
    let mut power = Complex::with_val(prec, (1, 0));
    let mut sum = Complex::with_val(prec, (0, 0));
    let threshold = Float::with_val(prec, 1) >> 100u32;
    let mut quiet = 0;
    for k in 0..=max_terms {
        let arg = Float::with_val(prec, &a * k) + &b;
        let g = arg.gamma();
        if g.is_finite() {
            let term = Complex::with_val(prec, &power / &g);
            let tnorm = Float::with_val(prec, term.abs_ref());
            sum += &term;
            let snorm = Float::with_val(prec, sum.abs_ref());
            let past_peak = k as f64 * log_r - ln_abs_gamma(alpha * k as f64 + beta).0 < peak - 1.0
                || peak == 0.0;
            if past_peak && tnorm <= Float::with_val(prec, &snorm * &threshold) {
                quiet += 1;
                if quiet >= 3 {
                    return Ok(sum);
                }
            } else {
                quiet = 0;
            }
        }
        power *= &zz;
    }
    Err(MlError::NotConverged { terms: max_terms })
}
