//! Inversion of the Laplace transform s^{alpha-beta} / (s^alpha - z) on an
//! optimally placed parabolic contour, with residues of the poles that lie
//! to the right of it.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Branch, MLParams, MlEval};

const LOG_EPS_MACHINE: f64 = -36.043_653_389_117_15;
const TARGET_LOG_EPS: f64 = -34.538_776_394_910_684; // ln(1e-15)
const MAX_NODES: f64 = 200.0;

#[derive(Debug, Clone, Copy)]
struct Param {
    mu: f64,
    h: f64,
    n: f64,
}

const INADMISSIBLE: Param = Param { mu: 0.0, h: 0.0, n: f64::INFINITY };

/// Region bounded by the singularities with phi values `phi_j < phi_j1`.
fn optimal_rb(phi_j: f64, phi_j1: f64, pj: f64, qj: f64, log_epsilon: f64) -> Param {
    let fac = 1.01;
    let f_max = (log_epsilon - LOG_EPS_MACHINE).exp();
    let sq_j = phi_j.sqrt();
    let threshold = 2.0 * (log_epsilon - LOG_EPS_MACHINE).sqrt();
    let sq_j1 = phi_j1.sqrt().min(threshold - sq_j);

    let (bar_j, bar_j1, f_bar) = if pj < 1e-14 && qj < 1e-14 {
        (sq_j, sq_j1, 1.0)
    } else if pj < 1e-14 {
        let f_min = if sq_j > 0.0 { fac * (sq_j / (sq_j1 - sq_j)).powf(qj) } else { fac };
        if f_min >= f_max {
            return INADMISSIBLE;
        }
        let f_bar = f_min + f_min / f_max * (f_max - f_min);
        let fq = f_bar.powf(-1.0 / qj);
        (sq_j, (2.0 * sq_j1 - fq * sq_j) / (2.0 + fq), f_bar)
    } else if qj < 1e-14 {
        let f_min = fac * (sq_j1 / (sq_j1 - sq_j)).powf(pj);
        if f_min >= f_max {
            return INADMISSIBLE;
        }
        let f_bar = f_min + f_min / f_max * (f_max - f_min);
        let fp = f_bar.powf(-1.0 / pj);
        ((2.0 * sq_j + fp * sq_j1) / (2.0 - fp), sq_j1, f_bar)
    } else {
        let f_min = fac * (sq_j + sq_j1) / (sq_j1 - sq_j).powf(pj.max(qj));
        if f_min >= f_max {
            return INADMISSIBLE;
        }
        let f_min = f_min.max(1.5);
        let f_bar = f_min + f_min / f_max * (f_max - f_min);
        let fp = f_bar.powf(-1.0 / pj);
        let fq = f_bar.powf(-1.0 / qj);
        let w = -phi_j1 / log_epsilon;
        let den = 2.0 + w - (1.0 + w) * fp + fq;
        let bj = ((2.0 + w + fq) * sq_j + fp * sq_j1) / den;
        let bj1 = (-(1.0 + w) * fq * sq_j + (2.0 + w - (1.0 + w) * fp) * sq_j1) / den;
        (bj, bj1, f_bar)
    };

    let log_epsilon = log_epsilon - f_bar.ln();
    let w = -bar_j1 * bar_j1 / log_epsilon;
    let mu = (((1.0 + w) * bar_j + bar_j1) / (2.0 + w)).powi(2);
    let h = -2.0 * PI / log_epsilon * (bar_j1 - bar_j) / ((1.0 + w) * bar_j + bar_j1);
    let n = ((1.0 - log_epsilon / mu).sqrt() / h).ceil();
    if !(mu > 0.0 && h > 0.0 && n.is_finite()) {
        return INADMISSIBLE;
    }
    Param { mu, h, n }
}

/// Unbounded region to the right of the singularity with phi value `phi_j`.
fn optimal_ru(phi_j: f64, pj: f64, log_epsilon: f64) -> Param {
    let sq_phi = phi_j.sqrt();
    let mut phibar = if phi_j > 0.0 { phi_j * 1.01 } else { 0.01 };
    let mut sq_phibar = phibar.sqrt();
    let (f_min, f_max, f_tar) = (1.0, 10.0, 5.0_f64);
    let (mut n, mut a, mut sq_mu);
    let mut guard = 0;
    loop {
        let log_eps_phi = log_epsilon / phibar;
        n = (phibar / PI * (1.0 - 1.5 * log_eps_phi + (1.0 - 2.0 * log_eps_phi).sqrt())).ceil();
        a = PI * n / phibar;
        sq_mu = sq_phibar * (4.0 - a).abs() / (7.0 - (1.0 + 12.0 * a).sqrt()).abs();
        let fbar = ((sq_phibar - sq_phi) / sq_mu).powf(-pj);
        guard += 1;
        if pj < 1e-14 || (f_min < fbar && fbar < f_max) || guard > 100 {
            break;
        }
        sq_phibar = f_tar.powf(-1.0 / pj) * sq_mu;
        phibar = sq_phibar * sq_phibar;
    }
    let mut mu = sq_mu * sq_mu;
    let mut h = (-3.0 * a - 2.0 + 2.0 * (1.0 + 12.0 * a).sqrt()) / (4.0 - a) / n;
    let threshold = log_epsilon - LOG_EPS_MACHINE;
    if mu > threshold {
        let q = if pj.abs() < 1e-14 { 0.0 } else { f_tar.powf(-1.0 / pj) * mu.sqrt() };
        let phibar = (q + sq_phi).powi(2);
        if phibar < threshold {
            let w = (LOG_EPS_MACHINE / (LOG_EPS_MACHINE - log_epsilon)).sqrt();
            let u = (-phibar / LOG_EPS_MACHINE).sqrt();
            mu = threshold;
            n = (w * log_epsilon / 2.0 / PI / (u * w - 1.0)).ceil();
            h = w / n;
        } else {
            return INADMISSIBLE;
        }
    }
    if !(mu > 0.0 && h > 0.0 && n.is_finite() && n > 0.0) {
        return INADMISSIBLE;
    }
    Param { mu, h, n }
}

/// Evaluates E_{alpha,beta}(z) for z != 0.
///
/// The error estimate combines the (possibly relaxed) truncation target
/// with the rounding amplification of the quadrature sum.
pub(super) fn laplace_inversion(p: MLParams, z: Complex64) -> MlEval {
    let (alpha, beta) = (p.alpha(), p.beta_param());
    let theta = z.arg();
    let kmin = (-alpha / 2.0 - theta / (2.0 * PI)).ceil() as i64;
    let kmax = (alpha / 2.0 - theta / (2.0 * PI)).floor() as i64;
    let radius = z.norm().powf(1.0 / alpha);
    let mut poles: Vec<(Complex64, f64)> = (kmin..=kmax)
        .map(|k| {
            let s = Complex64::from_polar(radius, (theta + 2.0 * PI * k as f64) / alpha);
            (s, (s.re + s.norm()) / 2.0)
        })
        .filter(|&(_, phi)| phi > 1e-15)
        .collect();
    poles.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut s_star = vec![Complex64::new(0.0, 0.0)];
    let mut phi = vec![0.0];
    for &(s, ph) in &poles {
        s_star.push(s);
        phi.push(ph);
    }
    let j1 = s_star.len();
    let mut pp = vec![(-2.0 * (alpha - beta + 1.0)).max(0.0)];
    pp.extend(std::iter::repeat_n(1.0, j1 - 1));
    let mut qq: Vec<f64> = std::iter::repeat_n(1.0, j1 - 1).collect();
    qq.push(f64::INFINITY);
    phi.push(f64::INFINITY);

    let mut log_epsilon = TARGET_LOG_EPS;
    let admissible: Vec<usize> = (0..j1)
        .filter(|&j| phi[j] < log_epsilon - LOG_EPS_MACHINE && phi[j] < phi[j + 1])
        .collect();

    let (region, param) = loop {
        let mut best: Option<(usize, Param)> = None;
        for &j in &admissible {
            let prm = if j + 1 < j1 {
                optimal_rb(phi[j], phi[j + 1], pp[j], qq[j], log_epsilon)
            } else {
                optimal_ru(phi[j], pp[j], log_epsilon)
            };
            if best.is_none_or(|(_, b)| prm.n < b.n) {
                best = Some((j, prm));
            }
        }
        match best {
            Some((j, prm)) if prm.n <= MAX_NODES => break (j, prm),
            _ if log_epsilon < -2.0 => log_epsilon += std::f64::consts::LN_10,
            _ => {
                return MlEval {
                    value: Complex64::new(f64::NAN, f64::NAN),
                    branch: Branch::Contour,
                    est_abs_err: f64::INFINITY,
                }
            }
        }
    };

    let Param { mu, h, n } = param;
    let n = n as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for k in -n..=n {
        let u = h * k as f64;
        let zc = Complex64::new(mu * (1.0 - u * u), 2.0 * mu * u);
        let zd = Complex64::new(-2.0 * mu * u, 2.0 * mu);
        let lz = zc.ln();
        let num = (lz * (alpha - beta) + zc).exp();
        let den = (lz * alpha).exp() - z;
        let s = num / den * zd;
        abs_sum += s.norm();
        sum += s;
    }
    let integral = sum * h / Complex64::new(0.0, 2.0 * PI);
    let residues = s_star[region + 1..]
        .iter()
        .map(|&s| (s.ln() * (1.0 - beta) + s).exp() / alpha)
        .fold(Complex64::new(0.0, 0.0), |a, b| a + b);
    let mut value = integral + residues;
    if z.im == 0.0 {
        value.im = 0.0;
    }
    let roundoff = 8.0 * f64::EPSILON * (abs_sum * h / (2.0 * PI) + residues.norm());
    MlEval { value, branch: Branch::Contour, est_abs_err: log_epsilon.exp() + roundoff }
}
