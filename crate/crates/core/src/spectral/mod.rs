//! Periodic Fourier discretization on [-L, L).
//!
//! Coefficients follow u_hat(lambda_n) = (1/N) sum_j u(x_j) exp(-i lambda_n x_j) and are
//! stored in FFT order: index `idx < N/2` holds mode `n = idx`, the rest hold
//! `n = idx - N`. Index `N/2` is the unpaired Nyquist mode.

mod io;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::fracops::FracOrder;

pub use io::{read_snapshot, write_snapshot};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid model parameters: {0}")]
    Params(String),
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("boundary decay violated: |u(-L)| = {left:.3e}, |u(L-h)| = {right:.3e}, max |u| = {max:.3e}, tolerance {tol:.1e}")]
    Decay { left: f64, right: f64, max: f64, tol: f64 },
    #[error("snapshot i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid with cached FFT plans. Cloning is cheap.
#[derive(Clone)]
pub struct SpectralGrid {
    half_length: f64,
    n_points: usize,
    plans: Arc<Plans>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("half_length", &self.half_length)
            .field("n_points", &self.n_points)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.half_length == other.half_length && self.n_points == other.n_points
    }
}

impl SpectralGrid {
    pub fn new(half_length: f64, n_points: usize) -> Result<Self, SpectralError> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(SpectralError::Grid(format!("half length {half_length} must be positive")));
        }
        if n_points < 8 || !n_points.is_multiple_of(2) {
            return Err(SpectralError::Grid(format!("N = {n_points} must be even and >= 8")));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n_points),
            inverse: planner.plan_fft_inverse(n_points),
        };
        Ok(Self { half_length, n_points, plans: Arc::new(plans) })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n_points as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.node(j)).collect()
    }

    /// Signed mode number stored at FFT index `idx`.
    pub fn mode(&self, idx: usize) -> i64 {
        let n = self.n_points as i64;
        let i = idx as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn nyquist_index(&self) -> usize {
        self.n_points / 2
    }

    pub fn wavenumber(&self, idx: usize) -> f64 {
        std::f64::consts::PI * self.mode(idx) as f64 / self.half_length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.wavenumber(i)).collect()
    }

    /// Largest |n| kept by the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n_points as i64 - 1) / 3
    }

    pub fn forward_transform(&self, samples: &[f64]) -> Result<Vec<Complex64>, SpectralError> {
        self.check_len(samples.len())?;
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.plans.forward.process(&mut buf);
        let inv_n = 1.0 / self.n_points as f64;
        for (idx, c) in buf.iter_mut().enumerate() {
            // exp(-i lambda_n x_j) = (-1)^n exp(-2 pi i n j / N)
            let sign = if self.mode(idx) % 2 == 0 { inv_n } else { -inv_n };
            *c *= sign;
        }
        Ok(buf)
    }

    /// Real part of the synthesis sum; exact for Hermitian inputs.
    pub fn inverse_transform(&self, coeffs: &[Complex64]) -> Result<Vec<f64>, SpectralError> {
        self.check_len(coeffs.len())?;
        let mut buf: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| if self.mode(idx) % 2 == 0 { c } else { -c })
            .collect();
        self.plans.inverse.process(&mut buf);
        Ok(buf.into_iter().map(|c| c.re).collect())
    }

    fn check_len(&self, got: usize) -> Result<(), SpectralError> {
        if got != self.n_points {
            return Err(SpectralError::Length { expected: self.n_points, got });
        }
        Ok(())
    }
}

/// Coefficients a, b, c, d, k, gamma of the model, the order beta and horizon T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub beta: FracOrder,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub k: f64,
    pub gamma: f64,
    pub t_final: f64,
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        beta: FracOrder,
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        k: f64,
        gamma: f64,
        t_final: f64,
    ) -> Result<Self, SpectralError> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(SpectralError::Params(format!("a = {a} must be positive")));
        }
        for (name, v) in [("b", b), ("c", c), ("d", d), ("k", k), ("gamma", gamma)] {
            if !v.is_finite() {
                return Err(SpectralError::Params(format!("{name} = {v} is not finite")));
            }
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(SpectralError::Params(format!("T = {t_final} must be positive")));
        }
        Ok(Self { beta, a, b, c, d, k, gamma, t_final })
    }

    /// Largest real root of a^2 l^4 - c l^2 + k, beyond which Re P > 0.
    pub fn stability_threshold(&self) -> f64 {
        let a2 = self.a * self.a;
        let disc = self.c * self.c - 4.0 * a2 * self.k;
        if disc < 0.0 {
            return 0.0;
        }
        let q = (self.c + disc.sqrt()) / (2.0 * a2);
        if q > 0.0 {
            q.sqrt()
        } else {
            0.0
        }
    }
}

/// P(lambda) = a^2 lambda^4 - i b lambda^3 - c lambda^2 + i d lambda + k.
pub fn symbol(params: &ModelParams, lambda: f64) -> Complex64 {
    let l2 = lambda * lambda;
    let re = params.a * params.a * l2 * l2 - params.c * l2 + params.k;
    let im = -params.b * l2 * lambda + params.d * lambda;
    Complex64::new(re, im)
}

/// Symbol at FFT index `idx`; the unpaired Nyquist mode keeps only the even part
/// so that real fields stay real.
pub fn mode_symbol(params: &ModelParams, grid: &SpectralGrid, idx: usize) -> Complex64 {
    let p = symbol(params, grid.wavenumber(idx));
    if idx == grid.nyquist_index() {
        Complex64::new(p.re, 0.0)
    } else {
        p
    }
}

/// a^2 u_xxxx + b u_xxx + c u_xx + d u_x + k u, applied as multiplication by P.
pub fn linear_operator(params: &ModelParams, f: &Field) -> Field {
    let grid = f.grid().clone();
    f.map_coeffs(|idx, c| c * mode_symbol(params, &grid, idx))
}

/// A real field held both as node samples and as Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: SpectralGrid,
    samples: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: &SpectralGrid) -> Self {
        let n = grid.n_points();
        Self { grid: grid.clone(), samples: vec![0.0; n], coeffs: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_samples(grid: &SpectralGrid, samples: Vec<f64>) -> Result<Self, SpectralError> {
        let coeffs = grid.forward_transform(&samples)?;
        Ok(Self { grid: grid.clone(), samples, coeffs })
    }

    pub fn from_fn(grid: &SpectralGrid, f: impl Fn(f64) -> f64) -> Self {
        let samples = grid.nodes().into_iter().map(f).collect();
        Self::from_samples(grid, samples).expect("length matches grid")
    }

    /// Projects onto Hermitian coefficients before synthesis.
    pub fn from_coeffs(grid: &SpectralGrid, mut coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        grid.check_len(coeffs.len())?;
        let n = grid.n_points();
        for idx in 1..n / 2 {
            let avg = 0.5 * (coeffs[idx] + coeffs[n - idx].conj());
            coeffs[idx] = avg;
            coeffs[n - idx] = avg.conj();
        }
        coeffs[0].im = 0.0;
        coeffs[n / 2].im = 0.0;
        let samples = grid.inverse_transform(&coeffs)?;
        Ok(Self { grid: grid.clone(), samples, coeffs })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &Field) -> Result<Field, SpectralError> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch);
        }
        Ok(Field {
            grid: self.grid.clone(),
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a + s * b).collect(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b * s).collect(),
        })
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|v| v * s).collect(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    fn map_coeffs(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Field {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, &c)| f(i, c)).collect();
        Field::from_coeffs(&self.grid, coeffs).expect("length matches grid")
    }
}

/// m-th derivative; the Nyquist coefficient is dropped for odd m.
pub fn spectral_derivative(f: &Field, m: u32) -> Field {
    let grid = f.grid();
    let nyq = grid.nyquist_index();
    f.map_coeffs(|idx, c| {
        if m % 2 == 1 && idx == nyq {
            return Complex64::new(0.0, 0.0);
        }
        c * Complex64::new(0.0, grid.wavenumber(idx)).powu(m)
    })
}

/// Zeroes modes with |n| above the 2/3 cutoff.
pub fn dealias(f: &Field) -> Field {
    let grid = f.grid();
    let cut = grid.dealias_cutoff();
    f.map_coeffs(|idx, c| if grid.mode(idx).abs() > cut { Complex64::new(0.0, 0.0) } else { c })
}

/// u u_x with 2/3-rule truncation of the input and the product.
pub fn nonlinear_term(f: &Field) -> Field {
    let u = dealias(f);
    let ux = spectral_derivative(&u, 1);
    let prod: Vec<f64> = u.samples.iter().zip(&ux.samples).map(|(a, b)| a * b).collect();
    dealias(&Field::from_samples(f.grid(), prod).expect("length matches grid"))
}

/// Integral of v^2 by the uniform periodic rule.
pub fn l2_norm2(f: &Field) -> f64 {
    f.grid.spacing() * f.samples.iter().map(|v| v * v).sum::<f64>()
}

/// ||v||^2 + ||v_xx||^2.
pub fn norm2_pair(f: &Field) -> f64 {
    l2_norm2(f) + l2_norm2(&spectral_derivative(f, 2))
}

/// Integral of |d^m u|^2 plus the integral of (1 + x^2)^s u^2.
pub fn semi_norm(f: &Field, m: u32, s: u32) -> f64 {
    let dm = if m == 0 { f.clone() } else { spectral_derivative(f, m) };
    l2_norm2(&dm) + weighted_l2(f, s)
}

/// Integral of (1 + x^2)^s u^2.
pub fn weighted_l2(f: &Field, s: u32) -> f64 {
    let g = f.grid();
    f.samples
        .iter()
        .enumerate()
        .map(|(j, v)| (1.0 + g.node(j).powi(2)).powi(s as i32) * v * v)
        .sum::<f64>()
        * g.spacing()
}

/// max over nodes of |x|^k |d^n u|.
pub fn weighted_sup(f: &Field, k: u32, n: u32) -> f64 {
    let dn = if n == 0 { f.clone() } else { spectral_derivative(f, n) };
    let g = f.grid();
    dn.samples
        .iter()
        .enumerate()
        .map(|(j, v)| g.node(j).abs().powi(k as i32) * v.abs())
        .fold(0.0, f64::max)
}

/// Ratio of the larger edge value to max |u|; zero for the zero field.
pub fn boundary_ratio(f: &Field) -> f64 {
    let max = f.max_abs();
    if max == 0.0 {
        return 0.0;
    }
    let n = f.samples.len();
    f.samples[0].abs().max(f.samples[n - 1].abs()) / max
}

/// Fails when the field has not decayed at the ends of the truncated domain.
pub fn check_boundary_decay(f: &Field, tol: f64) -> Result<(), SpectralError> {
    if boundary_ratio(f) <= tol {
        return Ok(());
    }
    let n = f.samples.len();
    Err(SpectralError::Decay { left: f.samples[0].abs(), right: f.samples[n - 1].abs(), max: f.max_abs(), tol })
}
