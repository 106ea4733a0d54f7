//! Local linear and Nadaraya–Watson drift estimators and their asymptotic
//! standardization constants.
//!
//! With responses `Y_i = (X_{i+1} - X_i)/Δ` for `i = 0, ..., n-1`, the local
//! linear estimate at `x` is the intercept of the kernel-weighted least
//! squares line through `(X_i - x, Y_i)`. Writing
//! `S_{n,k} = Σ K_h(X_i - x)(X_i - x)^k`, it equals
//!
//! ```text
//! μ̂(x) = Σ c_i (X_{i+1} - X_i) / (Δ Σ c_i),
//! c_i = K_h(X_i - x) {S_{n,2}/h² - ((X_i - x)/h) S_{n,1}/h},
//! ```
//!
//! and `μ̂ = ĝ_n / ĥ_n` with `ĥ_n(x) = (S_{n,0} S_{n,2} - S_{n,1}²)/(n²h²)`.
//! That ratio subtracts nearly equal sums when the data are dense near `x`,
//! so [`local_linear_drift`] solves the same least squares problem with
//! centered, weighted running moments instead. [`local_linear_literal`]
//! evaluates the displayed ratio verbatim for cross-checking.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::kernels::{lambda_fractional_integral, nw_fractional_integral, Kernel};
use crate::math;
use crate::models::{DensityProvenance, SdeModel, StationaryDensity};
use crate::simulate::ObservedPath;
use crate::stable::StableParams;
use crate::{Error, Result};

/// Relative size below which a denominator counts as "no data near x".
pub const DEGENERACY_FACTOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    LocalLinear,
    NadarayaWatson,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::LocalLinear => "local_linear",
            Method::NadarayaWatson => "nadaraya_watson",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local_linear" => Ok(Method::LocalLinear),
            "nadaraya_watson" => Ok(Method::NadarayaWatson),
            _ => Err(Error::Config(format!(
                "unknown method `{s}` (expected local_linear or nadaraya_watson)"
            ))),
        }
    }
}

/// A drift estimate at one point.
///
/// `estimate` is `None` exactly when `degenerate` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftEstimate {
    pub x: f64,
    pub estimate: Option<f64>,
    pub h: f64,
    pub method: Method,
    /// `ĥ_n(x)` for local linear; `(1/n) Σ K_h(X_i - x)` for Nadaraya–Watson.
    pub denominator: f64,
    pub degenerate: bool,
}

/// Weighted running moments of `(u_i, Y_i)` with `u_i = (X_i - x)/h` and
/// weights `K(u_i)`, accumulated with West's weighted update.
#[derive(Debug, Clone, Copy, Default)]
struct LocalMoments {
    weight: f64,
    mean_u: f64,
    mean_y: f64,
    cuu: f64,
    cuy: f64,
}

impl LocalMoments {
    fn collect<I: IntoIterator<Item = (f64, f64)>>(pairs: I, x: f64, h: f64, kernel: &Kernel) -> (Self, usize) {
        let mut m = LocalMoments::default();
        let mut n = 0usize;
        for (xi, yi) in pairs {
            n += 1;
            let u = (xi - x) / h;
            let w = kernel.evaluate(u);
            if w == 0.0 {
                continue;
            }
            m.weight += w;
            let r = w / m.weight;
            let du = u - m.mean_u;
            let dy = yi - m.mean_y;
            m.mean_u += du * r;
            m.mean_y += dy * r;
            m.cuu += w * du * (u - m.mean_u);
            m.cuy += w * du * (yi - m.mean_y);
        }
        (m, n)
    }
}

fn check_bandwidth(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::param(
            "h",
            format!("bandwidth must be positive and finite, got {h}"),
        ))
    }
}

/// Fit at `x` from explicit regression pairs `(X_i, Y_i)`.
pub fn fit_pairs<I: IntoIterator<Item = (f64, f64)>>(
    pairs: I,
    x: f64,
    h: f64,
    kernel: &Kernel,
    method: Method,
) -> Result<DriftEstimate> {
    check_bandwidth(h)?;
    let (m, n) = LocalMoments::collect(pairs, x, h, kernel);
    if n == 0 {
        return Err(Error::EmptyInput("no regression pairs"));
    }
    let nf = n as f64;
    let kmax = kernel.max_value();
    let (estimate, denominator, degenerate) = match method {
        Method::LocalLinear => {
            let det = m.weight * m.cuu;
            let degenerate = !(m.weight > 0.0) || !(det >= DEGENERACY_FACTOR * (nf * kmax) * (nf * kmax));
            let slope = m.cuy / m.cuu;
            (m.mean_y - slope * m.mean_u, det / (nf * nf * h * h), degenerate)
        }
        Method::NadarayaWatson => {
            let degenerate = !(m.weight >= DEGENERACY_FACTOR * nf * kmax) || m.weight == 0.0;
            (m.mean_y, m.weight / (nf * h), degenerate)
        }
    };
    Ok(DriftEstimate {
        x,
        estimate: if degenerate { None } else { Some(estimate) },
        h,
        method,
        denominator,
        degenerate,
    })
}

/// Local linear drift estimate `μ̂(x)`.
pub fn local_linear_drift(path: &ObservedPath, x: f64, h: f64, kernel: &Kernel) -> Result<DriftEstimate> {
    if path.n() < 2 {
        return Err(Error::param("n", "local linear fit needs at least two steps"));
    }
    fit_pairs(path.pairs(), x, h, kernel, Method::LocalLinear)
}

/// Nadaraya–Watson drift estimate
/// `Σ K_h(X_i - x)(X_{i+1} - X_i) / (Δ Σ K_h(X_i - x))`.
pub fn nadaraya_watson_drift(path: &ObservedPath, x: f64, h: f64, kernel: &Kernel) -> Result<DriftEstimate> {
    fit_pairs(path.pairs(), x, h, kernel, Method::NadarayaWatson)
}

/// `S_{n,k} = Σ_{i<n} K_h(X_i - x)(X_i - x)^k`; the last observation is not
/// used.
pub fn s_nk(path: &ObservedPath, x: f64, h: f64, kernel: &Kernel, k: u32) -> Result<f64> {
    check_bandwidth(h)?;
    if k > 3 {
        return Err(Error::param("k", format!("expected 0..=3, got {k}")));
    }
    Ok(path.x[..path.n()]
        .iter()
        .map(|&xi| {
            let d = xi - x;
            kernel.evaluate(d / h) / h * math::powi(d, k)
        })
        .sum())
}

/// `(1/n) Σ_{i<n} K_h(X_i - x) ((X_i - x)/h)^k`, which converges to
/// `f(x) ∫ u^k K(u) du`.
pub fn kernel_moment_sum(path: &ObservedPath, x: f64, h: f64, kernel: &Kernel, k: u32) -> Result<f64> {
    Ok(s_nk(path, x, h, kernel, k)? / (path.n() as f64 * math::powi(h, k)))
}

/// Kernel density estimate `(1/n) Σ_{i<n} K_h(X_i - x)`.
pub fn density_estimate(path: &ObservedPath, x: f64, h: f64, kernel: &Kernel) -> Result<f64> {
    Ok(s_nk(path, x, h, kernel, 0)? / path.n() as f64)
}

/// The local linear estimate evaluated exactly as the closed-form ratio of
/// weighted sums. `None` when the denominator is zero.
pub fn local_linear_literal(path: &ObservedPath, x: f64, h: f64, kernel: &Kernel) -> Result<Option<f64>> {
    let s1 = s_nk(path, x, h, kernel, 1)?;
    let s2 = s_nk(path, x, h, kernel, 2)?;
    let (mut num, mut den) = (0.0, 0.0);
    for w in path.x.windows(2) {
        let d = w[0] - x;
        let c = kernel.evaluate(d / h) / h * (s2 / (h * h) - (d / h) * s1 / h);
        num += c * (w[1] - w[0]);
        den += c;
    }
    den *= path.delta;
    Ok(if den == 0.0 { None } else { Some(num / den) })
}

/// Estimates at each grid point, in grid order. Degenerate points are kept
/// and flagged.
pub fn drift_curve(
    path: &ObservedPath,
    grid: &[f64],
    h: f64,
    kernel: &Kernel,
    method: Method,
) -> Result<Vec<DriftEstimate>> {
    grid.iter()
        .map(|&x| match method {
            Method::LocalLinear => local_linear_drift(path, x, h, kernel),
            Method::NadarayaWatson => nadaraya_watson_drift(path, x, h, kernel),
        })
        .collect()
}

/// Standardization of the local linear estimator:
/// `rate · Λ(x) · (μ̂(x) - μ(x) - h² Γ_μ(x))` is asymptotically
/// `S_α(1, β, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticConstants {
    /// `Λ(x) = (K₂ - K₁²) f(x)^{1-1/α} / (σ(x) (∫ K^α |K₂ - uK₁|^α)^{1/α})`.
    pub lambda_x: f64,
    /// `Γ_μ(x) = μ''(x) (K₂² - K₁K₃) / (2(K₂ - K₁²))`.
    pub gamma_mu_x: f64,
    /// `(nΔh)^{1-1/α}`.
    pub rate: f64,
    /// `h² Γ_μ(x)`.
    pub bias_term: f64,
    /// The density value used.
    pub f_x: f64,
    pub density: DensityProvenance,
    /// `K₂ - uK₁` changes sign on the kernel support.
    pub sign_flag: bool,
}

/// Nadaraya–Watson counterparts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NwAsymptoticConstants {
    /// `f(x)^{1-1/α} / (σ(x) (∫ K^α)^{1/α})`.
    pub lambda_x: f64,
    /// Second-order coefficient `[μ'(x) f'(x)/f(x) + μ''(x)/2] K₂`.
    pub gamma_mu_x: f64,
    pub rate: f64,
    /// First-order centering `h K₁` exactly as stated for the NW limit.
    pub bias_literal: f64,
    /// First-order bias `h K₁ μ'(x)` of a local constant fit with an
    /// asymmetric kernel.
    pub bias_slope: f64,
    /// `h² Γ_μ(x)`.
    pub bias_term: f64,
    pub f_x: f64,
    pub f_prime_x: f64,
    pub density: DensityProvenance,
}

struct Common {
    f_x: f64,
    sigma_x: f64,
    rate: f64,
}

fn common<M: SdeModel + ?Sized>(
    model: &M,
    density: &StationaryDensity,
    noise: &StableParams,
    x: f64,
    n: usize,
    delta: f64,
    h: f64,
) -> Result<Common> {
    noise.require_estimation_range()?;
    check_bandwidth(h)?;
    if !(delta > 0.0) || n == 0 {
        return Err(Error::param(
            "delta",
            format!("need n >= 1 and delta > 0, got n = {n}, delta = {delta}"),
        ));
    }
    let f_x = density.f(x)?;
    if !(f_x > 0.0) {
        return Err(Error::param(
            "f",
            format!("stationary density must be positive at x = {x}, got {f_x}"),
        ));
    }
    let sigma_x = model.sigma(x);
    if !(sigma_x > 0.0) {
        return Err(Error::param("sigma", format!("sigma({x}) = {sigma_x} is not positive")));
    }
    let rate = math::powf(n as f64 * delta * h, 1.0 - 1.0 / noise.alpha());
    Ok(Common { f_x, sigma_x, rate })
}

/// `Λ(x)`, `Γ_μ(x)`, the rate `(nΔh)^{1-1/α}` and the bias `h²Γ_μ(x)` for
/// the local linear estimator.
#[allow(clippy::too_many_arguments)]
pub fn asymptotic_constants<M: SdeModel + ?Sized>(
    model: &M,
    density: &StationaryDensity,
    noise: &StableParams,
    kernel: &Kernel,
    x: f64,
    n: usize,
    delta: f64,
    h: f64,
) -> Result<AsymptoticConstants> {
    let c = common(model, density, noise, x, n, delta, h)?;
    let alpha = noise.alpha();
    let var = kernel.variance();
    if !(var > 0.0) {
        return Err(Error::param("kernel", "K2 - K1^2 must be positive"));
    }
    let frac = lambda_fractional_integral(kernel, alpha)?;
    let lambda_x = var * math::powf(c.f_x, 1.0 - 1.0 / alpha) / (c.sigma_x * math::powf(frac.value, 1.0 / alpha));
    let (k1, k2, k3) = (kernel.k1(), kernel.k2(), kernel.k3());
    let gamma_mu_x = model.mu_double_prime(x) * (k2 * k2 - k1 * k3) / (2.0 * var);
    Ok(AsymptoticConstants {
        lambda_x,
        gamma_mu_x,
        rate: c.rate,
        bias_term: h * h * gamma_mu_x,
        f_x: c.f_x,
        density: density.provenance(),
        sign_flag: frac.sign_changes,
    })
}

/// Constants of the Nadaraya–Watson limit theory.
#[allow(clippy::too_many_arguments)]
pub fn nw_asymptotic_constants<M: SdeModel + ?Sized>(
    model: &M,
    density: &StationaryDensity,
    noise: &StableParams,
    kernel: &Kernel,
    x: f64,
    n: usize,
    delta: f64,
    h: f64,
) -> Result<NwAsymptoticConstants> {
    let c = common(model, density, noise, x, n, delta, h)?;
    let alpha = noise.alpha();
    let frac = nw_fractional_integral(kernel, alpha)?;
    let lambda_x = math::powf(c.f_x, 1.0 - 1.0 / alpha) / (c.sigma_x * math::powf(frac, 1.0 / alpha));
    let f_prime_x = density.f_prime(x)?;
    let gamma_mu_x = (model.mu_prime(x) * f_prime_x / c.f_x + 0.5 * model.mu_double_prime(x)) * kernel.k2();
    Ok(NwAsymptoticConstants {
        lambda_x,
        gamma_mu_x,
        rate: c.rate,
        bias_literal: h * kernel.k1(),
        bias_slope: h * kernel.k1() * model.mu_prime(x),
        bias_term: h * h * gamma_mu_x,
        f_x: c.f_x,
        f_prime_x,
        density: density.provenance(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelKind;
    use crate::models::builtin_model;
    use alloc::vec;

    fn noise() -> StableParams {
        StableParams::symmetric(1.5).unwrap()
    }

    fn path(x: Vec<f64>, delta: f64) -> ObservedPath {
        ObservedPath::from_observations(x, delta, noise(), "manual").unwrap()
    }

    fn kernel(kind: KernelKind) -> Kernel {
        Kernel::new(kind)
    }

    /// Brute-force weighted least squares: build and solve the 2×2 normal
    /// equations in raw offsets by Cramer's rule.
    fn wls_oracle(xs: &[f64], ys: &[f64], x: f64, h: f64, k: &Kernel) -> f64 {
        let (mut a00, mut a01, mut a11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&xi, &yi) in xs.iter().zip(ys) {
            let w = k.evaluate((xi - x) / h) / h;
            let d = xi - x;
            a00 += w;
            a01 += w * d;
            a11 += w * d * d;
            b0 += w * yi;
            b1 += w * d * yi;
        }
        (b0 * a11 - a01 * b1) / (a00 * a11 - a01 * a01)
    }

    #[test]
    fn s_nk_hand_cases() {
        let u = kernel(KernelKind::UniformSym);
        let p = path(vec![0.3, 5.0], 1.0);
        assert_eq!(s_nk(&p, 0.3, 1.0, &u, 0).unwrap(), 0.5);
        let flat = path(vec![0.3, 0.3, 0.3, 9.0], 1.0);
        assert_eq!(s_nk(&flat, 0.3, 1.0, &u, 1).unwrap(), 0.0);
        let e = kernel(KernelKind::Epanechnikov);
        let p = path(vec![0.0, 0.5, 2.0], 1.0);
        assert!((s_nk(&p, 0.0, 1.0, &e, 2).unwrap() - 0.140625).abs() < 1e-15);
        // X_n is excluded: moving it changes nothing.
        let q = path(vec![0.0, 0.5, 0.1], 1.0);
        assert_eq!(s_nk(&p, 0.0, 1.0, &e, 2).unwrap(), s_nk(&q, 0.0, 1.0, &e, 2).unwrap());
        assert!(s_nk(&p, 0.0, 1.0, &e, 4).is_err());
        assert!(s_nk(&p, 0.0, 0.0, &e, 0).is_err());
    }

    #[test]
    fn three_point_hand_case() {
        let p = path(vec![0.0, 0.5, -0.25], 1.0);
        let u = kernel(KernelKind::UniformSym);
        let ys = [0.5, -0.75];
        let expected = wls_oracle(&[0.0, 0.5], &ys, 0.0, 1.0, &u);
        // Two points determine the line exactly: intercept 0.5.
        assert!((expected - 0.5).abs() < 1e-15);
        let est = local_linear_drift(&p, 0.0, 1.0, &u).unwrap();
        assert!(!est.degenerate);
        assert!((est.estimate.unwrap() - expected).abs() < 1e-14);
        let lit = local_linear_literal(&p, 0.0, 1.0, &u).unwrap().unwrap();
        assert!((lit - expected).abs() < 1e-14);

        let nw = nadaraya_watson_drift(&p, 0.0, 1.0, &u).unwrap();
        let direct = (0.5 * 0.5 + 0.5 * -0.75) / (1.0 * (0.5 + 0.5));
        assert!((nw.estimate.unwrap() - direct).abs() < 1e-15);
        assert!((nw.denominator - 0.5).abs() < 1e-15);
    }

    #[test]
    fn affine_and_constant_responses_are_reproduced() {
        let k = kernel(KernelKind::Epanechnikov);
        let xs = [-0.4, -0.1, 0.05, 0.3, 0.7, 2.0];
        let (a, b) = (1.7, -3.2);
        let pairs = xs.iter().map(|&xi| (xi, a + b * (xi - 0.1)));
        let est = fit_pairs(pairs, 0.1, 0.8, &k, Method::LocalLinear).unwrap();
        assert!((est.estimate.unwrap() - a).abs() < 1e-13);

        let pairs = xs.iter().map(|&xi| (xi, 2.5));
        assert!(
            (fit_pairs(pairs.clone(), 0.1, 0.8, &k, Method::LocalLinear)
                .unwrap()
                .estimate
                .unwrap()
                - 2.5)
                .abs()
                < 1e-14
        );
        assert!(
            (fit_pairs(pairs, 0.1, 0.8, &k, Method::NadarayaWatson)
                .unwrap()
                .estimate
                .unwrap()
                - 2.5)
                .abs()
                < 1e-14
        );
    }

    #[test]
    fn single_support_point() {
        let k = kernel(KernelKind::Epanechnikov);
        let pairs = [(0.2, 4.0), (5.0, -1.0), (7.0, 3.0)];
        let nw = fit_pairs(pairs, 0.0, 0.5, &k, Method::NadarayaWatson).unwrap();
        assert_eq!(nw.estimate, Some(4.0));
        let ll = fit_pairs(pairs, 0.0, 0.5, &k, Method::LocalLinear).unwrap();
        assert!(ll.degenerate && ll.estimate.is_none());
    }

    #[test]
    fn coincident_support_points_make_only_local_linear_degenerate() {
        let k = kernel(KernelKind::UniformSym);
        let pairs = [(0.3, 1.0), (0.3, 2.0), (0.3, 6.0), (4.0, 0.0)];
        let ll = fit_pairs(pairs, 0.0, 1.0, &k, Method::LocalLinear).unwrap();
        assert!(ll.degenerate);
        let nw = fit_pairs(pairs, 0.0, 1.0, &k, Method::NadarayaWatson).unwrap();
        assert!(!nw.degenerate);
        assert!((nw.estimate.unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_window_is_degenerate_for_both() {
        let k = kernel(KernelKind::Epanechnikov);
        let p = path(vec![5.0, 5.5, 6.0, 5.8], 0.1);
        for m in [Method::LocalLinear, Method::NadarayaWatson] {
            let est = drift_curve(&p, &[0.0], 0.5, &k, m).unwrap()[0];
            assert!(est.degenerate && est.estimate.is_none());
            assert_eq!(est.denominator, 0.0);
        }
        assert_eq!(density_estimate(&p, 0.0, 0.5, &k).unwrap(), 0.0);
    }

    #[test]
    fn density_estimate_single_point() {
        let u = kernel(KernelKind::UniformSym);
        let p = path(vec![1.0, 3.0], 1.0);
        assert_eq!(density_estimate(&p, 1.0, 1.0, &u).unwrap(), 0.5);
    }

    #[test]
    fn drift_curve_keeps_order_and_flags() {
        let e = kernel(KernelKind::Epanechnikov);
        let p = path(vec![0.0, 0.2, -0.1, 0.3, 0.1, -0.2, 0.0], 0.5);
        let grid = [0.1, 10.0, -0.1];
        let curve = drift_curve(&p, &grid, 0.6, &e, Method::LocalLinear).unwrap();
        assert_eq!(curve.len(), 3);
        assert_eq!(curve.iter().map(|c| c.x).collect::<Vec<_>>(), grid.to_vec());
        assert!(!curve[0].degenerate && curve[1].degenerate && !curve[2].degenerate);
        for c in &curve {
            if let Some(v) = c.estimate {
                let single = local_linear_drift(&p, c.x, 0.6, &e).unwrap().estimate.unwrap();
                assert_eq!(v, single);
            }
        }
    }

    #[test]
    fn linear_drift_has_no_local_linear_bias() {
        let m = builtin_model("ou_linear", [("lambda", 2.0)]).unwrap();
        let d = StationaryDensity::gaussian(0.0, 0.5).unwrap();
        for kind in KernelKind::ALL {
            for x in [-1.0, 0.0, 0.7] {
                let c = asymptotic_constants(&m, &d, &noise(), &kernel(kind), x, 1000, 0.01, 0.3).unwrap();
                assert_eq!(c.gamma_mu_x, 0.0);
                assert_eq!(c.bias_term, 0.0);
                assert!(c.lambda_x > 0.0 && c.rate > 0.0);
            }
        }
    }

    #[test]
    fn symmetric_kernel_lambda_equals_nw_lambda() {
        let m = builtin_model("bounded_nonlinear", Vec::<(&str, f64)>::new()).unwrap();
        let d = StationaryDensity::gaussian(0.1, 0.8).unwrap();
        for kind in [KernelKind::Epanechnikov, KernelKind::Triangular, KernelKind::UniformSym] {
            for alpha in [1.2, 1.5, 1.9] {
                let noise = StableParams::symmetric(alpha).unwrap();
                let k = kernel(kind);
                let ll = asymptotic_constants(&m, &d, &noise, &k, 0.4, 500, 0.02, 0.25).unwrap();
                let nw = nw_asymptotic_constants(&m, &d, &noise, &k, 0.4, 500, 0.02, 0.25).unwrap();
                assert!((ll.lambda_x - nw.lambda_x).abs() < 1e-8 * nw.lambda_x, "{kind} {alpha}");
                assert_eq!(ll.rate, nw.rate);
                assert_eq!(nw.bias_literal, 0.0);
            }
        }
    }

    #[test]
    fn one_sided_kernel_bias_coefficient() {
        let m = builtin_model("tanh_drift", [("a", 1.0)]).unwrap();
        let d = StationaryDensity::gaussian(0.0, 1.0).unwrap();
        let k = kernel(KernelKind::UniformRight);
        let c = asymptotic_constants(&m, &d, &noise(), &k, 1.0, 1000, 0.01, 0.3).unwrap();
        // μ''(1) · [(1/3)² - (1/2)(1/4)] / (2(1/3 - 1/4)) = -μ''(1)/12
        assert!((c.gamma_mu_x + m.mu_double_prime(1.0) / 12.0).abs() < 1e-15);
        assert!(c.sign_flag);
    }

    #[test]
    fn nw_constants_vanish_for_symmetric_ou() {
        let m = builtin_model("ou_linear", Vec::<(&str, f64)>::new()).unwrap();
        let d = StationaryDensity::gaussian(0.0, 1.0).unwrap();
        let k = kernel(KernelKind::Epanechnikov);
        let c = nw_asymptotic_constants(&m, &d, &noise(), &k, 0.0, 1000, 0.01, 0.3).unwrap();
        assert_eq!(c.gamma_mu_x, 0.0);
        assert_eq!(c.bias_literal, 0.0);
        assert_eq!(c.bias_slope, 0.0);
    }

    #[test]
    fn nw_second_order_coefficient_direct_formula() {
        let m = builtin_model("tanh_drift", [("a", 1.0)]).unwrap();
        let d = StationaryDensity::gaussian(0.0, 0.7).unwrap();
        let k = kernel(KernelKind::Epanechnikov);
        let c = nw_asymptotic_constants(&m, &d, &noise(), &k, 1.0, 1000, 0.01, 0.3).unwrap();
        let f = crate::math::normal_pdf(1.0, 0.0, 0.7);
        let fp = -1.0 / 0.7 * f;
        let expected = (m.mu_prime(1.0) * fp / f + 0.5 * m.mu_double_prime(1.0)) * 0.2;
        assert!((c.gamma_mu_x - expected).abs() < 1e-12);
        assert!((c.bias_term - 0.09 * expected).abs() < 1e-12);
    }

    #[test]
    fn constants_reject_bad_inputs() {
        let m = builtin_model("ou_linear", Vec::<(&str, f64)>::new()).unwrap();
        let d = StationaryDensity::plug_in(&[5.0, 5.1, 5.2], Some(0.1)).unwrap();
        let k = kernel(KernelKind::Epanechnikov);
        assert!(asymptotic_constants(&m, &d, &noise(), &k, 0.0, 100, 0.01, 0.3).is_err());
        let g = StationaryDensity::gaussian(0.0, 1.0).unwrap();
        let cauchy = StableParams::symmetric(1.0).unwrap();
        assert!(asymptotic_constants(&m, &g, &cauchy, &k, 0.0, 100, 0.01, 0.3).is_err());
        assert!(asymptotic_constants(&m, &g, &noise(), &k, 0.0, 100, 0.01, -0.3).is_err());
    }

    #[test]
    fn rate_formula() {
        let m = builtin_model("ou_linear", Vec::<(&str, f64)>::new()).unwrap();
        let g = StationaryDensity::gaussian(0.0, 1.0).unwrap();
        let k = kernel(KernelKind::Epanechnikov);
        let c = asymptotic_constants(&m, &g, &noise(), &k, 0.0, 100_000, 0.01, 0.3).unwrap();
        assert!((c.rate - 300f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::LocalLinear, Method::NadarayaWatson] {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("loess".parse::<Method>().is_err());
    }
}
