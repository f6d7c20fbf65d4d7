//! Discrete fractional calculus on uniform time grids.
//!
//! The Riemann-Liouville integral uses piecewise-linear product integration
//! (the kernel is integrated exactly against the hat functions), the Caputo
//! derivative uses the L1 scheme. Both operators return 0 at the first node.

mod gamma;

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub use gamma::{gamma_fn, ln_abs_gamma, recip_gamma, GAMMA_MAX_ARG};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracError {
    #[error("gamma function domain error: x = {0} (x must be > 0)")]
    GammaDomain(f64),
    #[error("gamma function overflow at x = {0}")]
    GammaOverflow(f64),
    #[error("fractional order {0} outside the admissible range {1}")]
    Order(f64, &'static str),
    #[error("invalid time grid: {0}")]
    Grid(String),
    #[error("time series needs at least {needed} nodes, got {got}")]
    TooShort { needed: usize, got: usize },
}

/// Fractional order beta, 0 < beta <= 1.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    /// Order admissible for integrals and Gronwall-type bounds: 0 < beta <= 1.
    pub fn new(beta: f64) -> Result<Self, FracError> {
        if beta > 0.0 && beta <= 1.0 {
            Ok(Self(beta))
        } else {
            Err(FracError::Order(beta, "(0, 1]"))
        }
    }

    /// Order admissible for the Caputo derivative: 0 < beta < 1.
    pub fn caputo(beta: f64) -> Result<Self, FracError> {
        if beta > 0.0 && beta < 1.0 {
            Ok(Self(beta))
        } else {
            Err(FracError::Order(beta, "(0, 1)"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Uniform time grid t_n = t0 + n dt, n = 0..=n_steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n_steps: usize) -> Result<Self, FracError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(FracError::Grid(format!("dt must be positive, got {dt}")));
        }
        if n_steps == 0 {
            return Err(FracError::Grid("n_steps must be >= 1".into()));
        }
        if !t0.is_finite() {
            return Err(FracError::Grid(format!("t0 must be finite, got {t0}")));
        }
        Ok(Self { t0, dt, n_steps })
    }

    /// Grid covering [t0, t0 + length] with steps of (approximately) dt.
    ///
    /// The step count is rounded to the nearest integer and dt is adjusted so
    /// that n_steps * dt equals the window length.
    pub fn covering(t0: f64, length: f64, dt: f64) -> Result<Self, FracError> {
        if !(length > 0.0) || !(dt > 0.0) {
            return Err(FracError::Grid(format!("length {length} and dt {dt} must be positive")));
        }
        let n = (length / dt).round().max(1.0) as usize;
        Self::new(t0, length / n as f64, n)
    }

    #[inline]
    pub fn node(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }

    /// Midpoint of the m-th interval (t_{m-1}, t_m], m >= 1.
    #[inline]
    pub fn midpoint(&self, m: usize) -> f64 {
        self.t0 + (m as f64 - 0.5) * self.dt
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn end(&self) -> f64 {
        self.node(self.n_steps)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(move |n| self.node(n))
    }
}

/// Values that fractional operators act on: real or complex scalars.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

/// One value per node of a [`TimeGrid`], including t0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    grid: TimeGrid,
    values: Vec<T>,
}

impl<T: Scalar> TimeSeries<T> {
    pub fn new(grid: TimeGrid, values: Vec<T>) -> Result<Self, FracError> {
        if values.len() != grid.len() {
            return Err(FracError::Grid(format!(
                "series has {} values but the grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node.
    pub fn sample(grid: TimeGrid, f: impl Fn(f64) -> T) -> Self {
        let values = grid.nodes().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }
}

/// Node weights of the piecewise-linear product rule for I^beta at node n.
///
/// `(I^beta f)(t_n) ~= dt^beta / Gamma(beta + 2) * sum_j w[j] f_j`, j = 0..=n.
pub fn rl_weights(beta: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![0.0];
    }
    let p = beta + 1.0;
    let pow = |k: usize| (k as f64).powf(p);
    let mut w = vec![0.0; n + 1];
    let nf = n as f64;
    w[0] = pow(n - 1) - (nf - 1.0 - beta) * nf.powf(beta);
    for (j, wj) in w.iter_mut().enumerate().take(n).skip(1) {
        let k = n - j;
        *wj = pow(k + 1) - 2.0 * pow(k) + pow(k - 1);
    }
    w[n] = 1.0;
    w
}

/// Riemann-Liouville fractional integral of order beta in (0, 1] at every node.
pub fn rl_integral<T: Scalar>(f: &TimeSeries<T>, order: FracOrder) -> TimeSeries<T> {
    let beta = order.value();
    let grid = *f.grid();
    let n_steps = grid.n_steps;
    let scale = grid.dt.powf(beta) * recip_gamma(beta + 2.0);
    // shared power table: k^(beta+1), k = 0..=n_steps
    let p = beta + 1.0;
    let pow: Vec<f64> = (0..=n_steps).map(|k| (k as f64).powf(p)).collect();
    let vals = f.values();
    let mut out = Vec::with_capacity(grid.len());
    out.push(T::zero());
    for n in 1..=n_steps {
        let nf = n as f64;
        let w0 = pow[n - 1] - (nf - 1.0 - beta) * nf.powf(beta);
        let mut acc = vals[0] * w0 + vals[n];
        for j in 1..n {
            let k = n - j;
            acc = acc + vals[j] * (pow[k + 1] - 2.0 * pow[k] + pow[k - 1]);
        }
        out.push(acc * scale);
    }
    TimeSeries { grid, values: out }
}

/// L1 weights b_k = (k+1)^(1-beta) - k^(1-beta), k = 0..count.
pub fn l1_weights(beta: f64, count: usize) -> Vec<f64> {
    let e = 1.0 - beta;
    (0..count).map(|k| ((k + 1) as f64).powf(e) - (k as f64).powf(e)).collect()
}

/// L1-scheme Caputo derivative of order beta in (0, 1); node 0 is set to 0.
pub fn caputo_derivative<T: Scalar>(
    f: &TimeSeries<T>,
    order: FracOrder,
) -> Result<TimeSeries<T>, FracError> {
    let beta = order.value();
    if !(beta < 1.0) {
        return Err(FracError::Order(beta, "(0, 1)"));
    }
    let grid = *f.grid();
    if grid.len() < 2 {
        return Err(FracError::TooShort { needed: 2, got: grid.len() });
    }
    let b = l1_weights(beta, grid.n_steps);
    let scale = grid.dt.powf(-beta) * recip_gamma(2.0 - beta);
    let vals = f.values();
    let diffs: Vec<T> = vals.windows(2).map(|w| w[1] - w[0]).collect();
    let mut out = Vec::with_capacity(grid.len());
    out.push(T::zero());
    for n in 1..=grid.n_steps {
        let mut acc = T::zero();
        for (j, &d) in diffs.iter().enumerate().take(n) {
            acc = acc + d * b[n - j - 1];
        }
        out.push(acc * scale);
    }
    Ok(TimeSeries { grid, values: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adaptive Gauss-Kronrod-free oracle: composite Gauss-Legendre on a
    /// graded mesh for the weakly singular integral int_0^t (t-s)^(b-1) g(s) ds.
    fn rl_quadrature(g: impl Fn(f64) -> f64, beta: f64, t: f64) -> f64 {
        // substitution s = t - u^(1/beta) removes the singularity:
        // int_0^t (t-s)^(b-1) g(s) ds = (1/beta) int_0^{t^beta} g(t - v^(1/beta)) dv
        let upper = t.powf(beta);
        let nodes = [
            -0.973_906_528_517_171_7,
            -0.865_063_366_688_984_5,
            -0.679_409_568_299_024_4,
            -0.433_395_394_129_247_2,
            -0.148_874_338_981_631_2,
            0.148_874_338_981_631_2,
            0.433_395_394_129_247_2,
            0.679_409_568_299_024_4,
            0.865_063_366_688_984_5,
            0.973_906_528_517_171_7,
        ];
        let weights = [
            0.066_671_344_308_688_14,
            0.149_451_349_150_580_6,
            0.219_086_362_515_982_04,
            0.269_266_719_309_996_35,
            0.295_524_224_714_752_87,
            0.295_524_224_714_752_87,
            0.269_266_719_309_996_35,
            0.219_086_362_515_982_04,
            0.149_451_349_150_580_6,
            0.066_671_344_308_688_14,
        ];
        let panels = 400;
        let h = upper / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let a = p as f64 * h;
            for (x, w) in nodes.iter().zip(weights.iter()) {
                let v = a + 0.5 * h * (x + 1.0);
                acc += w * 0.5 * h * g(t - v.powf(1.0 / beta));
            }
        }
        acc / beta / gamma_fn(beta).unwrap()
    }

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::new(0.0, 1.0 / n as f64, n).unwrap()
    }

    #[test]
    fn rl_of_constant_is_exact() {
        let g = grid(64);
        let f = TimeSeries::sample(g, |_| 1.0);
        let i = rl_integral(&f, FracOrder::new(0.5).unwrap());
        let expected = 1.0 / gamma_fn(1.5).unwrap();
        assert!((i.values()[64] - expected).abs() < 1e-14);
        assert!((expected - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-15);
        assert_eq!(i.values()[0], 0.0);
    }

    #[test]
    fn rl_of_zero_is_zero() {
        let f = TimeSeries::sample(grid(10), |_| 0.0);
        let i = rl_integral(&f, FracOrder::new(0.3).unwrap());
        assert!(i.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rl_of_linear_matches_quadrature_oracle() {
        let beta = 0.3;
        let oracle = rl_quadrature(|s| s, beta, 1.0);
        let analytic = gamma_fn(2.0).unwrap() / gamma_fn(2.3).unwrap();
        assert!((oracle - analytic).abs() < 1e-8, "oracle {oracle} analytic {analytic}");
        let f = TimeSeries::sample(grid(32), |t| t);
        let i = rl_integral(&f, FracOrder::new(beta).unwrap());
        // piecewise-linear product integration is exact for linear data
        assert!((i.values()[32] - oracle).abs() < 1e-8);
    }

    #[test]
    fn rl_weights_match_inline_sum() {
        let beta = 0.45;
        let g = grid(12);
        let f = TimeSeries::sample(g, |t| (3.0 * t).sin() + t * t);
        let i = rl_integral(&f, FracOrder::new(beta).unwrap());
        let n = 9;
        let w = rl_weights(beta, n);
        let s: f64 = w.iter().zip(f.values()).map(|(w, v)| w * v).sum();
        let direct = s * g.dt.powf(beta) / gamma_fn(beta + 2.0).unwrap();
        assert!((direct - i.values()[n]).abs() < 1e-14);
    }

    #[test]
    fn rl_integral_second_order_on_smooth_data() {
        let beta = 0.6;
        let exact = rl_quadrature(|s| (2.0 * s).cos(), beta, 1.0);
        let err = |n: usize| {
            let f = TimeSeries::sample(grid(n), |t| (2.0 * t).cos());
            (rl_integral(&f, FracOrder::new(beta).unwrap()).values()[n] - exact).abs()
        };
        let (e1, e2) = (err(64), err(128));
        assert!((e1 / e2).log2() > 1.8, "order {}", (e1 / e2).log2());
    }

    #[test]
    fn caputo_of_constant_vanishes() {
        let f = TimeSeries::sample(grid(20), |_| 3.5);
        let d = caputo_derivative(&f, FracOrder::caputo(0.4).unwrap()).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn caputo_of_linear_is_exact() {
        let f = TimeSeries::sample(grid(50), |t| t);
        let d = caputo_derivative(&f, FracOrder::caputo(0.5).unwrap()).unwrap();
        assert!((d.values()[50] - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-13);
    }

    #[test]
    fn caputo_of_square_converges_at_two_minus_beta() {
        let beta = 0.4;
        let exact = 2.0 / gamma_fn(2.6).unwrap();
        let err = |n: usize| {
            let f = TimeSeries::sample(grid(n), |t| t * t);
            (caputo_derivative(&f, FracOrder::caputo(beta).unwrap()).unwrap().values()[n] - exact)
                .abs()
        };
        let (e1, e2, e3) = (err(100), err(200), err(400));
        let o1 = (e1 / e2).log2();
        let o2 = (e2 / e3).log2();
        assert!((o1 - 1.6).abs() < 0.1 && (o2 - 1.6).abs() < 0.1, "orders {o1} {o2}");
    }

    #[test]
    fn order_and_length_errors() {
        assert!(FracOrder::new(0.0).is_err());
        assert!(FracOrder::new(1.0).is_ok());
        assert!(FracOrder::caputo(1.0).is_err());
        assert!(FracOrder::new(1.2).is_err());
        let f = TimeSeries::sample(grid(4), |t| t);
        assert!(caputo_derivative(&f, FracOrder::new(1.0).unwrap()).is_err());
        assert!(TimeSeries::new(grid(4), vec![0.0; 3]).is_err());
        assert!(TimeGrid::new(0.0, -1.0, 3).is_err());
        assert!(TimeGrid::new(0.0, 0.1, 0).is_err());
    }

    #[test]
    fn complex_series_use_the_same_weights() {
        let g = grid(16);
        let re = TimeSeries::sample(g, |t| t.sin());
        let im = TimeSeries::sample(g, |t| t * t);
        let c = TimeSeries::sample(g, |t| Complex64::new(t.sin(), t * t));
        let ord = FracOrder::caputo(0.7).unwrap();
        let dc = caputo_derivative(&c, ord).unwrap();
        let dr = caputo_derivative(&re, ord).unwrap();
        let di = caputo_derivative(&im, ord).unwrap();
        for n in 0..=16 {
            assert_eq!(dc.values()[n], Complex64::new(dr.values()[n], di.values()[n]));
        }
    }
}
