//! Standard α-stable laws `S_α(1, β, 0)`.
//!
//! The law is fixed by its characteristic function
//!
//! ```text
//! E exp(iuZ) = exp(-|u|^α (1 - iβ sgn(u) tan(απ/2))),   α ≠ 1,
//! E exp(iuZ) = exp(-|u| (1 + iβ (2/π) sgn(u) ln|u|)),   α = 1,
//! ```
//!
//! the "1-parameterization" (Samorodnitsky–Taqqu). At α = 2 this is
//! `exp(-u²)`, i.e. Normal(0, 2).
//!
//! Sampling uses the Chambers–Mallows–Stuck construction written directly in
//! this parameterization. The form usually quoted for α ≠ 1,
//!
//! ```text
//! B = arctan(β tan(απ/2)) / α,    S = (1 + β² tan²(απ/2))^(1/(2α)),
//! X = S sin(α(V + B)) / cos(V)^(1/α) · (cos(V - α(V + B)) / W)^((1-α)/α),
//! ```
//!
//! with V ~ Uniform(-π/2, π/2) and W ~ Exp(1), already targets the
//! 1-parameterization; no location shift is applied. (The shift by
//! `β tan(απ/2)` is only needed when targeting the continuous
//! 0-parameterization, which we never do.)

mod ks;

pub use ks::{
    ks_coefficient, one_sample_critical_value, one_sample_ks, symmetry_critical_value, two_sample_critical_value,
    two_sample_ks,
};

use alloc::format;
use num_complex::Complex64;
use rand_core::RngCore;

use crate::math::{self, FRAC_PI_2, PI};
use crate::rng::{exp1, open01};
use crate::{Error, Result};

/// Stability index α and skewness β of `S_α(1, β, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    alpha: f64,
    beta: f64,
}

impl StableParams {
    /// Accepts `0 < alpha <= 2` and `-1 <= beta <= 1`. At `alpha == 2` the
    /// law is Gaussian and `beta` is ignored (stored as 0).
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::param("alpha", format!("{alpha} not in (0, 2]")));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::param("beta", format!("{beta} not in [-1, 1]")));
        }
        let beta = if alpha == 2.0 { 0.0 } else { beta };
        Ok(StableParams { alpha, beta })
    }

    pub fn symmetric(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_gaussian(&self) -> bool {
        self.alpha == 2.0
    }

    /// Check the stricter range `1 < alpha <= 2` required by the drift
    /// estimators and the path simulator.
    pub fn require_estimation_range(&self) -> Result<()> {
        if self.alpha > 1.0 {
            Ok(())
        } else {
            Err(Error::param(
                "alpha",
                format!(
                    "{} not in (1, 2]; the drift estimator is inconsistent for alpha <= 1",
                    self.alpha
                ),
            ))
        }
    }

    /// A warning for parameters the sampler accepts but the estimation
    /// theory does not cover.
    pub fn estimation_warning(&self) -> Option<&'static str> {
        if self.alpha == 1.0 {
            Some("alpha = 1: log-corrected characteristic function; the local linear estimator is inconsistent here")
        } else if self.alpha < 1.0 {
            Some("alpha < 1: outside the estimation theory (requires 1 < alpha < 2)")
        } else {
            None
        }
    }
}

/// `E exp(iuZ)` for `Z ~ S_α(1, β, 0)`.
pub fn theoretical_char_fn(params: &StableParams, u: f64) -> Complex64 {
    if u == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let (alpha, beta) = (params.alpha, params.beta);
    let abs_u = u.abs();
    let sgn = u.signum();
    let (re, im) = if alpha == 1.0 {
        (-abs_u, -abs_u * beta * (2.0 / PI) * sgn * math::ln(abs_u))
    } else {
        let a = math::powf(abs_u, alpha);
        (-a, a * beta * sgn * math::tan_half_pi_alpha(alpha))
    };
    Complex64::new(re, im).exp()
}

/// Mean of `exp(iux)` over the sample.
pub fn empirical_char_fn(samples: &[f64], u: f64) -> Result<Complex64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    let (mut c, mut s) = (0.0, 0.0);
    for &x in samples {
        let (sn, cs) = libm::sincos(u * x);
        c += cs;
        s += sn;
    }
    let n = samples.len() as f64;
    Ok(Complex64::new(c / n, s / n))
}

/// Precomputed Chambers–Mallows–Stuck constants for one parameter pair.
///
/// Immutable; the random stream is always passed in, so one sampler can be
/// shared by many workers that each own a stream.
#[derive(Debug, Clone, Copy)]
pub struct StableSampler {
    params: StableParams,
    shift: f64,
    scale: f64,
}

impl StableSampler {
    pub fn new(params: StableParams) -> Self {
        let alpha = params.alpha;
        let (shift, scale) = if alpha == 1.0 || alpha == 2.0 {
            (0.0, 1.0)
        } else {
            let t = params.beta * math::tan_half_pi_alpha(alpha);
            (math::atan(t) / alpha, math::powf(1.0 + t * t, 1.0 / (2.0 * alpha)))
        };
        StableSampler { params, shift, scale }
    }

    pub fn params(&self) -> StableParams {
        self.params
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = PI * (open01(rng) - 0.5);
        let w = exp1(rng);
        let alpha = self.params.alpha;
        if alpha == 2.0 {
            // sin(2V) / cos(V)^(1/2) * (cos(V) / W)^(-1/2) simplifies to 2 sin(V) sqrt(W).
            2.0 * math::sin(v) * math::sqrt(w)
        } else if alpha == 1.0 {
            let beta = self.params.beta;
            let p = FRAC_PI_2 + beta * v;
            (2.0 / PI) * (p * math::tan(v) - beta * math::ln(FRAC_PI_2 * w * math::cos(v) / p))
        } else {
            let arg = alpha * (v + self.shift);
            let cos_v = math::cos(v);
            self.scale * math::sin(arg) / math::powf(cos_v, 1.0 / alpha)
                * math::powf(math::cos(v - arg) / w, (1.0 - alpha) / alpha)
        }
    }

    /// Fill `out` with independent draws.
    pub fn fill<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for x in out {
            *x = self.sample(rng);
        }
    }
}

/// One draw of `S_α(1, β, 0)`. Prefer [`StableSampler`] in loops.
pub fn sample_standard_stable<R: RngCore + ?Sized>(params: &StableParams, rng: &mut R) -> f64 {
    StableSampler::new(*params).sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use alloc::vec;
    use alloc::vec::Vec;

    fn draws(alpha: f64, beta: f64, n: usize, seed: u64) -> Vec<f64> {
        let sampler = StableSampler::new(StableParams::new(alpha, beta).unwrap());
        let mut rng = stream(seed);
        let mut out = vec![0.0; n];
        sampler.fill(&mut rng, &mut out);
        out
    }

    #[test]
    fn parameter_validation() {
        assert!(StableParams::new(0.0, 0.0).is_err());
        assert!(StableParams::new(2.01, 0.0).is_err());
        assert!(StableParams::new(f64::NAN, 0.0).is_err());
        assert!(StableParams::new(1.5, 1.01).is_err());
        assert!(StableParams::new(1.5, -1.01).is_err());
        assert!(StableParams::new(0.5, 1.0).is_ok());
        assert_eq!(StableParams::new(2.0, 0.7).unwrap().beta(), 0.0);
        assert!(StableParams::new(1.0, 0.0).unwrap().estimation_warning().is_some());
        assert!(StableParams::new(1.0, 0.0).unwrap().require_estimation_range().is_err());
        assert!(StableParams::new(1.5, 0.0).unwrap().estimation_warning().is_none());
    }

    #[test]
    fn char_fn_closed_forms() {
        let g = StableParams::new(2.0, 0.7).unwrap();
        let phi = theoretical_char_fn(&g, 1.0);
        assert!((phi.re - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(phi.im, 0.0);

        for p in [(1.5, 0.3), (1.0, -1.0), (0.7, 1.0), (2.0, 0.0)] {
            let params = StableParams::new(p.0, p.1).unwrap();
            assert_eq!(theoretical_char_fn(&params, 0.0), Complex64::new(1.0, 0.0));
        }

        let s = StableParams::new(1.5, 0.0).unwrap();
        let phi = theoretical_char_fn(&s, -2.0);
        assert!((phi.re - (-(2.0f64).powf(1.5)).exp()).abs() < 1e-15);
        assert_eq!(phi.im, 0.0);
    }

    #[test]
    fn char_fn_is_hermitian_and_bounded() {
        for &(a, b) in &[(1.2, -1.0), (1.5, 0.5), (1.0, 0.8), (0.6, 1.0)] {
            let p = StableParams::new(a, b).unwrap();
            for k in -40..=40 {
                let u = k as f64 * 0.1;
                let phi = theoretical_char_fn(&p, u);
                let phi_neg = theoretical_char_fn(&p, -u);
                assert!(phi.norm() <= 1.0 + 1e-15);
                assert!((phi - phi_neg.conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn empirical_char_fn_trivial_cases() {
        assert_eq!(empirical_char_fn(&[0.0], 3.0).unwrap(), Complex64::new(1.0, 0.0));
        let phi = empirical_char_fn(&[PI, -PI], 1.0).unwrap();
        assert!((phi.re + 1.0).abs() < 1e-15);
        assert!(phi.im.abs() < 1e-15);
        assert!(empirical_char_fn(&[], 1.0).is_err());
    }

    #[test]
    fn gaussian_boundary_has_variance_two() {
        let n = 1_000_000;
        let xs = draws(2.0, 0.0, n, 11);
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 2.0).abs() < 0.02 * 2.0, "variance {var}");
    }

    #[test]
    fn symmetric_law_matches_char_fn() {
        let n = 100_000;
        let xs = draws(1.5, 0.0, n, 5);
        let tol = 3.0 / (n as f64).sqrt();
        let p = StableParams::new(1.5, 0.0).unwrap();
        for k in -4..=4 {
            let u = k as f64 * 0.5;
            let err = (empirical_char_fn(&xs, u).unwrap() - theoretical_char_fn(&p, u)).norm();
            assert!(err < tol, "u = {u}: error {err}");
        }
        let e1 = empirical_char_fn(&xs, 1.0).unwrap();
        assert!((e1.norm() - (-1.0f64).exp()).abs() < tol);
    }

    #[test]
    fn totally_skewed_law_matches_char_fn() {
        let n = 200_000;
        let xs = draws(1.5, 1.0, n, 6);
        let p = StableParams::new(1.5, 1.0).unwrap();
        let tol = 3.0 / (n as f64).sqrt();
        for k in -4..=4 {
            let u = k as f64 * 0.5;
            let th = theoretical_char_fn(&p, u);
            let em = empirical_char_fn(&xs, u).unwrap();
            assert!((em.re - th.re).abs() < tol && (em.im - th.im).abs() < tol, "u = {u}");
        }
        // β = 1 with α > 1 makes the right tail heavy and the left tail light.
        let mut sorted = xs.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        let q = |p: f64| sorted[(p * n as f64) as usize];
        assert!(q(0.999) - q(0.5) > 3.0 * (q(0.5) - q(0.001)));
    }

    #[test]
    fn cauchy_boundary_matches_log_corrected_char_fn() {
        let n = 200_000;
        for beta in [0.0, 0.5] {
            let xs = draws(1.0, beta, n, 9);
            let p = StableParams::new(1.0, beta).unwrap();
            for u in [-2.0, -0.5, 0.5, 1.0, 3.0] {
                let err = (empirical_char_fn(&xs, u).unwrap() - theoretical_char_fn(&p, u)).norm();
                assert!(err < 4.0 / (n as f64).sqrt(), "beta {beta}, u {u}: {err}");
            }
        }
    }

    #[test]
    fn symmetric_law_is_symmetric() {
        let xs = draws(1.5, 0.0, 20_000, 21);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        let d = two_sample_ks(&xs, &neg).unwrap();
        assert!(d < two_sample_critical_value(xs.len(), neg.len(), 0.01));
    }

    #[test]
    fn same_seed_same_bits() {
        let a = draws(1.3, -0.4, 1000, 77);
        let b = draws(1.3, -0.4, 1000, 77);
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = draws(1.3, -0.4, 1000, 78);
        assert_ne!(a, c);
    }

    #[test]
    fn free_function_matches_sampler() {
        let p = StableParams::new(1.7, 0.2).unwrap();
        let mut r1 = stream(1);
        let mut r2 = stream(1);
        let s = StableSampler::new(p);
        for _ in 0..100 {
            assert_eq!(
                sample_standard_stable(&p, &mut r1).to_bits(),
                s.sample(&mut r2).to_bits()
            );
        }
    }
}
