//! Floating point helpers backed by `libm` so the crate stays `no_std`.

pub use core::f64::consts::{FRAC_PI_2, PI};

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `x^k` by repeated multiplication.
#[inline]
pub fn powi(x: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, _| acc * x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn tan(x: f64) -> f64 {
    libm::tan(x)
}

#[inline]
pub fn atan(x: f64) -> f64 {
    libm::atan(x)
}

#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub fn cosh(x: f64) -> f64 {
    libm::cosh(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// `tan(απ/2)`, exactly zero at α = 2.
///
/// `libm::tan(PI)` returns about `-1.2e-16`, which would leave a spurious
/// imaginary part in the Gaussian characteristic function.
#[inline]
pub fn tan_half_pi_alpha(alpha: f64) -> f64 {
    if alpha == 2.0 {
        0.0
    } else {
        tan(alpha * FRAC_PI_2)
    }
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// CDF of Normal(0, variance).
pub fn normal_cdf(x: f64, variance: f64) -> f64 {
    0.5 * libm::erfc(-x / sqrt(2.0 * variance))
}

/// Density of Normal(mean, variance).
pub fn normal_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let z = x - mean;
    exp(-z * z / (2.0 * variance)) / sqrt(2.0 * PI * variance)
}
