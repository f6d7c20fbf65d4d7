//! Two-parameter Mittag-Leffler function E_{alpha,beta}(z) = sum z^k / Gamma(alpha k + beta)
//! and the three time kernels of the fractional mild solution.
//!
//! Evaluation is dispatched between a certified double-precision series,
//! the optimally truncated large-argument expansion (with its exponential
//! pole contributions) and a Laplace-inversion contour. Every branch returns
//! an error estimate; results that miss the requested tolerance are reported
//! as [`MlError::Uncertified`] together with the best value available.

mod asymptotic;
mod contour;
mod series;

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::fracops::{recip_gamma, FracOrder};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MlError {
    #[error("invalid Mittag-Leffler parameters: {0}")]
    Params(String),
    #[error("argument {0} is not finite")]
    NonFinite(Complex64),
    #[error("arg z = {arg:.6} lies in the growth sector |arg z| < {mu:.6}")]
    Sector { arg: f64, mu: f64 },
    #[error("kernel time must be positive, got {0}")]
    Time(f64),
    #[error("E overflows: Re z^(1/alpha) = {0:.3}")]
    Overflow(f64),
    #[error("series did not converge within {terms} terms")]
    NotConverged { terms: usize },
    #[error("could not certify tolerance: value {value}, estimated error {est_abs_err:.3e} ({branch:?})")]
    Uncertified { value: Complex64, est_abs_err: f64, branch: Branch },
}

/// Parameters (alpha, beta) with 0 < alpha < 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams {
    alpha: f64,
    beta_param: f64,
}

impl MLParams {
    pub fn new(alpha: f64, beta_param: f64) -> Result<Self, MlError> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(MlError::Params(format!("alpha = {alpha} outside (0, 2)")));
        }
        if !beta_param.is_finite() {
            return Err(MlError::Params(format!("beta = {beta_param} is not finite")));
        }
        Ok(Self { alpha, beta_param })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta_param(&self) -> f64 {
        self.beta_param
    }
}

/// Opening angle separating the algebraic-decay sector from the growth sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorConfig {
    mu: f64,
}

impl SectorConfig {
    /// Requires pi alpha / 2 < mu < min(pi, pi alpha).
    pub fn new(alpha: f64, mu: f64) -> Result<Self, MlError> {
        let (lo, hi) = Self::bounds(alpha);
        if !(mu > lo && mu < hi) {
            return Err(MlError::Params(format!("mu = {mu} outside ({lo}, {hi})")));
        }
        Ok(Self { mu })
    }

    /// Midpoint of the admissible interval.
    pub fn default_for(alpha: f64) -> Self {
        let (lo, hi) = Self::bounds(alpha);
        Self { mu: 0.5 * (lo + hi) }
    }

    fn bounds(alpha: f64) -> (f64, f64) {
        (PI * alpha / 2.0, PI.min(PI * alpha))
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn in_cut_sector(&self, z: Complex64) -> bool {
        z.arg().abs() >= self.mu
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Zero,
    Series,
    Asymptotic,
    Contour,
}

/// A value with the branch that produced it and an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlEval {
    pub value: Complex64,
    pub branch: Branch,
    pub est_abs_err: f64,
}

/// Dispatcher settings. A value is certified when its estimated error is
/// at most `max(rel_tol * |E|, abs_tol)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlConfig {
    pub z_switch: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for MlConfig {
    fn default() -> Self {
        Self { z_switch: 15.0, rel_tol: 1e-10, abs_tol: 0.0 }
    }
}

impl MlConfig {
    fn tolerance(&self, value: Complex64) -> f64 {
        (self.rel_tol * value.norm()).max(self.abs_tol)
    }
}

const SERIES_MAX_TERMS: usize = 20_000;
const ASYMPTOTIC_MAX_TERMS: usize = 400;
const EXTENDED_PEAK_LIMIT: f64 = 400.0;

/// E_{alpha,beta}(z) with the default dispatcher settings.
pub fn mittag_leffler(p: MLParams, z: Complex64) -> Result<Complex64, MlError> {
    evaluate(p, z, &MlConfig::default()).map(|e| e.value)
}

/// Hybrid evaluation with explicit settings.
pub fn evaluate(p: MLParams, z: Complex64, cfg: &MlConfig) -> Result<MlEval, MlError> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(MlError::NonFinite(z));
    }
    // the coefficients are real, so working in the upper half plane makes
    // conjugate symmetry exact
    if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        return evaluate(p, z.conj(), cfg).map(|e| MlEval { value: e.value.conj(), ..e });
    }
    if z == Complex64::new(0.0, 0.0) {
        let value = Complex64::new(recip_gamma(p.beta_param), 0.0);
        return Ok(MlEval { value, branch: Branch::Zero, est_abs_err: 0.0 });
    }
    let lead = asymptotic::principal_poles(p.alpha, z)
        .iter()
        .map(|s| s.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if lead > 700.0 {
        return Err(MlError::Overflow(lead));
    }

    let finite = |e: &MlEval| e.value.norm().is_finite() && e.est_abs_err.is_finite();
    let ok = |e: &MlEval| finite(e) && e.est_abs_err <= cfg.tolerance(e.value);
    let mut best: Option<MlEval> = None;
    let consider = |e: MlEval, best: &mut Option<MlEval>| {
        let rel = |x: &MlEval| x.est_abs_err / x.value.norm().max(f64::MIN_POSITIVE);
        if e.value.norm().is_finite() && best.as_ref().is_none_or(|b| rel(&e) < rel(b)) {
            *best = Some(e);
        }
    };

    let real_axis = z.im == 0.0;
    let finish = |mut e: MlEval| {
        if real_axis {
            e.value.im = 0.0;
        }
        e
    };
    let r = z.norm();
    if r <= cfg.z_switch {
        let e = series::series_f64(p, z, SERIES_MAX_TERMS);
        if ok(&e) {
            return Ok(finish(e));
        }
        consider(e, &mut best);
    }
    if r > 1.0 {
        let e = asymptotic::adaptive(p, z, ASYMPTOTIC_MAX_TERMS);
        // stricter acceptance: the smallest-term estimate is not a rigorous bound
        let strict = MlConfig { rel_tol: cfg.rel_tol * 1e-2, abs_tol: cfg.abs_tol * 1e-2, ..*cfg };
        if finite(&e) && e.est_abs_err <= strict.tolerance(e.value) {
            return Ok(finish(e));
        }
        consider(e, &mut best);
    }
    let e = contour::laplace_inversion(p, z);
    if ok(&e) {
        return Ok(e);
    }
    consider(e, &mut best);
    // last resort: extended precision, affordable while the peak term stays moderate
    if r.powf(1.0 / p.alpha) <= EXTENDED_PEAK_LIMIT {
        if let Ok(value) = series::series_extended(p, z, SERIES_MAX_TERMS) {
            let est_abs_err = 4.0 * f64::EPSILON * value.norm();
            return Ok(finish(MlEval { value, branch: Branch::Series, est_abs_err }));
        }
    }
    match best {
        Some(b) => Err(MlError::Uncertified { value: b.value, est_abs_err: b.est_abs_err, branch: b.branch }),
        None => Err(MlError::Uncertified {
            value: Complex64::new(f64::NAN, f64::NAN),
            est_abs_err: f64::INFINITY,
            branch: Branch::Contour,
        }),
    }
}

/// Bare algebraic expansion -sum_{r=1}^{n} z^{-r} / Gamma(beta - alpha r),
/// valid in the sector mu <= |arg z| <= pi for the default mu.
pub fn ml_asymptotic(p: MLParams, z: Complex64, n_terms: usize) -> Result<Complex64, MlError> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(MlError::NonFinite(z));
    }
    let sector = SectorConfig::default_for(p.alpha);
    if !sector.in_cut_sector(z) {
        return Err(MlError::Sector { arg: z.arg(), mu: sector.mu });
    }
    if n_terms == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(asymptotic::algebraic_sum(p, z, n_terms))
}

/// Algebraic expansion truncated at its smallest term, plus the exponential
/// contributions of the principal-sheet poles. Valid for |z| > 1 in any direction.
pub fn ml_asymptotic_adaptive(p: MLParams, z: Complex64) -> Result<MlEval, MlError> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(MlError::NonFinite(z));
    }
    if z.im < 0.0 {
        let e = asymptotic::adaptive(p, z.conj(), ASYMPTOTIC_MAX_TERMS);
        return Ok(MlEval { value: e.value.conj(), ..e });
    }
    Ok(asymptotic::adaptive(p, z, ASYMPTOTIC_MAX_TERMS))
}

/// Compensated double-precision series with its rounding estimate.
pub fn ml_series(p: MLParams, z: Complex64) -> MlEval {
    series::series_f64(p, z, SERIES_MAX_TERMS)
}

/// Series summed in MPFR at a precision chosen to absorb all cancellation.
/// Slow; intended for reference values.
pub fn ml_series_extended(p: MLParams, z: Complex64, max_terms: usize) -> Result<Complex64, MlError> {
    series::series_extended(p, z, max_terms)
}

/// Contour evaluation, exposed for cross-checks.
pub fn ml_contour(p: MLParams, z: Complex64) -> MlEval {
    if z.im < 0.0 {
        let e = contour::laplace_inversion(p, z.conj());
        return MlEval { value: e.value.conj(), ..e };
    }
    contour::laplace_inversion(p, z)
}

fn kernel_params(beta: FracOrder, shift: f64) -> MLParams {
    MLParams { alpha: beta.value(), beta_param: shift }
}

/// Solution kernel E_{beta,1}(-P t^beta).
pub fn kernel_e(beta: FracOrder, p: Complex64, t: f64, cfg: &MlConfig) -> Result<Complex64, MlError> {
    if !(t >= 0.0) {
        return Err(MlError::Time(t));
    }
    if t == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let b = beta.value();
    evaluate(kernel_params(beta, 1.0), -p * t.powf(b), cfg).map(|e| e.value)
}

/// Forcing kernel t^{beta-1} E_{beta,beta}(-P t^beta).
pub fn kernel_k(beta: FracOrder, p: Complex64, t: f64, cfg: &MlConfig) -> Result<Complex64, MlError> {
    if !(t > 0.0) {
        return Err(MlError::Time(t));
    }
    let b = beta.value();
    let e = evaluate(kernel_params(beta, b), -p * t.powf(b), cfg)?.value;
    Ok(e * t.powf(b - 1.0))
}

/// Antiderivative of the forcing kernel, t^beta E_{beta,beta+1}(-P t^beta).
pub fn kernel_antiderivative(
    beta: FracOrder,
    p: Complex64,
    t: f64,
    cfg: &MlConfig,
) -> Result<Complex64, MlError> {
    if !(t >= 0.0) {
        return Err(MlError::Time(t));
    }
    if t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let b = beta.value();
    let tb = t.powf(b);
    let e = evaluate(kernel_params(beta, b + 1.0), -p * tb, cfg)?.value;
    Ok(e * tb)
}
