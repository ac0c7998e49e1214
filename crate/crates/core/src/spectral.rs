//! Periodic spectral primitives on uniform grids `α_j = 2πj/N`, `N = 2ⁿ`.
//!
//! Coefficients use the normalised convention `f(α) = Σ_k c_k e^{ikα}` with
//! `c_k = (1/N) Σ_j f_j e^{-ikα_j}`, stored in FFT order. Index `N/2` is the
//! Nyquist mode; it is treated as an even mode (kept by even-order
//! multipliers, dropped by odd ones).

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub const MIN_GRID: usize = 8;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Samples of a 2π-periodic real function on the uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSamples {
    values: Vec<f64>,
}

impl PeriodicSamples {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_grid(values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_grid(n)?;
        Self::new((0..n).map(|j| f(node(j, n))).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }
}

impl AsRef<[f64]> for PeriodicSamples {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

pub fn check_grid(n: usize) -> Result<()> {
    if n >= MIN_GRID && n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::InvalidGrid(n))
    }
}

#[inline]
pub fn node(j: usize, n: usize) -> f64 {
    2.0 * PI * j as f64 / n as f64
}

/// Signed wavenumber of FFT slot `j`; the Nyquist slot maps to `+N/2`.
#[inline]
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

pub fn forward(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(&mut buf));
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Inverse transform, keeping the real part.
pub fn inverse(coeffs: &[Complex64]) -> Vec<f64> {
    let n = coeffs.len();
    let mut buf = coeffs.to_vec();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(&mut buf));
    buf.into_iter().map(|c| c.re).collect()
}

/// Applies a Fourier multiplier `m(k)` to real samples.
pub fn apply_multiplier(values: &[f64], multiplier: impl Fn(i64) -> Complex64) -> Vec<f64> {
    let n = values.len();
    let mut c = forward(values);
    for (j, cj) in c.iter_mut().enumerate() {
        *cj *= multiplier(wavenumber(j, n));
    }
    inverse(&c)
}

fn derivative_symbol(k: i64, n: usize, order: u32) -> Complex64 {
    if order % 2 == 1 && k == (n / 2) as i64 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, k as f64).powu(order)
}

/// `d^m f / dα^m` via the symbol `(ik)^m`.
pub fn derivative(values: &[f64], order: u32) -> Vec<f64> {
    let n = values.len();
    apply_multiplier(values, |k| derivative_symbol(k, n, order))
}

pub fn fourier_derivative(f: &PeriodicSamples, order: u32) -> PeriodicSamples {
    assert!(order >= 1, "derivative order must be at least one");
    PeriodicSamples {
        values: derivative(f.values(), order),
    }
}

pub fn hilbert(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    apply_multiplier(values, |k| {
        if k == 0 || k == (n / 2) as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -(k.signum() as f64))
        }
    })
}

/// Periodic Hilbert transform, multiplier `-i sgn(k)`.
pub fn hilbert_transform(f: &PeriodicSamples) -> PeriodicSamples {
    PeriodicSamples {
        values: hilbert(f.values()),
    }
}

/// Zero-mean antiderivative of the oscillatory part of `values`.
///
/// Returns the antiderivative samples together with the mean of `values`, so
/// that `∫_0^α f = mean·α + (P(α) - P(0))`.
pub fn antiderivative(values: &[f64]) -> (Vec<f64>, f64) {
    let n = values.len();
    let mut c = forward(values);
    let mean = c[0].re;
    for (j, cj) in c.iter_mut().enumerate() {
        let k = wavenumber(j, n);
        *cj = if k == 0 || k == (n / 2) as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            *cj / Complex64::new(0.0, k as f64)
        };
    }
    (inverse(&c), mean)
}

/// `∫_0^{2π} f(α') ln|2 sin((α-α')/2)| dα'` at every node.
///
/// Exact for band-limited `f`: the kernel has Fourier multiplier `-π/|k|`
/// and zero mean.
pub fn log_sine_convolution(values: &[f64]) -> Vec<f64> {
    apply_multiplier(values, |k| {
        if k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-PI / k.unsigned_abs() as f64, 0.0)
        }
    })
}

/// Zeroes every coefficient whose modulus is below `tol`.
pub fn krasny_filter(coeffs: &mut [Complex64], tol: f64) {
    for c in coeffs.iter_mut() {
        if c.norm() < tol {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// High-order exponential filter `ρ(k) = exp(-strength (2|k|/N)^order)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothingFilter {
    pub strength: f64,
    pub order: i32,
}

impl Default for SmoothingFilter {
    fn default() -> Self {
        Self {
            strength: 10.0,
            order: 25,
        }
    }
}

impl SmoothingFilter {
    pub fn factor(&self, k: i64, n: usize) -> f64 {
        let x = 2.0 * k.unsigned_abs() as f64 / n as f64;
        (-self.strength * x.powi(self.order)).exp()
    }

    pub fn apply(&self, coeffs: &mut [Complex64]) {
        let n = coeffs.len();
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c *= self.factor(wavenumber(j, n), n);
        }
    }
}

pub fn smoothing_filter(coeffs: &mut [Complex64]) {
    SmoothingFilter::default().apply(coeffs)
}
