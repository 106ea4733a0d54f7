//! Drift/diffusion specifications and stationary density oracles.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::quad::{self, Tolerance};
use crate::simulate::{simulate_path, PathConfig};
use crate::stable::StableParams;
use crate::{Error, Result};

/// Coefficients of `dX = μ(X-) dt + σ(X-) dZ`.
pub trait SdeModel: Sync {
    fn name(&self) -> &str;
    fn mu(&self, x: f64) -> f64;
    fn mu_prime(&self, x: f64) -> f64;
    fn mu_double_prime(&self, x: f64) -> f64;
    fn sigma(&self, x: f64) -> f64;
    /// `(σ₀, σ₁)` with `σ₀ <= σ(x) <= σ₁` everywhere.
    fn sigma_bounds(&self) -> (f64, f64);
    /// A bound `L` on `|μ'|`.
    fn lipschitz_mu(&self) -> f64;
}

/// The registered models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinModel {
    /// `μ(x) = γ - λx`, constant `σ`.
    OuLinear { gamma: f64, lambda: f64, sigma: f64 },
    /// `μ(x) = -a tanh(x)`, constant `σ`.
    TanhDrift { a: f64, sigma: f64 },
    /// `μ(x) = -λx/(1+x²) - cx`, `σ(x) = σ₀ + σ₁/(1+x²)`.
    BoundedNonlinear {
        lambda: f64,
        c: f64,
        sigma0: f64,
        sigma1: f64,
    },
}

pub const MODEL_NAMES: [&str; 3] = ["ou_linear", "tanh_drift", "bounded_nonlinear"];

impl BuiltinModel {
    pub fn is_linear(&self) -> bool {
        matches!(self, BuiltinModel::OuLinear { .. })
    }

    /// Parameters as `(name, value)` pairs in a fixed order.
    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        match *self {
            BuiltinModel::OuLinear { gamma, lambda, sigma } => {
                alloc::vec![("gamma", gamma), ("lambda", lambda), ("sigma", sigma)]
            }
            BuiltinModel::TanhDrift { a, sigma } => alloc::vec![("a", a), ("sigma", sigma)],
            BuiltinModel::BoundedNonlinear {
                lambda,
                c,
                sigma0,
                sigma1,
            } => alloc::vec![("lambda", lambda), ("c", c), ("sigma0", sigma0), ("sigma1", sigma1)],
        }
    }
}

impl fmt::Display for BuiltinModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name())?;
        for (i, (k, v)) in self.parameters().into_iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str(")")
    }
}

impl SdeModel for BuiltinModel {
    fn name(&self) -> &str {
        match self {
            BuiltinModel::OuLinear { .. } => "ou_linear",
            BuiltinModel::TanhDrift { .. } => "tanh_drift",
            BuiltinModel::BoundedNonlinear { .. } => "bounded_nonlinear",
        }
    }

    fn mu(&self, x: f64) -> f64 {
        match *self {
            BuiltinModel::OuLinear { gamma, lambda, .. } => gamma - lambda * x,
            BuiltinModel::TanhDrift { a, .. } => -a * math::tanh(x),
            BuiltinModel::BoundedNonlinear { lambda, c, .. } => -lambda * x / (1.0 + x * x) - c * x,
        }
    }

    fn mu_prime(&self, x: f64) -> f64 {
        match *self {
            BuiltinModel::OuLinear { lambda, .. } => -lambda,
            BuiltinModel::TanhDrift { a, .. } => -a * sech2(x),
            BuiltinModel::BoundedNonlinear { lambda, c, .. } => {
                let q = 1.0 + x * x;
                -lambda * (1.0 - x * x) / (q * q) - c
            }
        }
    }

    fn mu_double_prime(&self, x: f64) -> f64 {
        match *self {
            BuiltinModel::OuLinear { .. } => 0.0,
            BuiltinModel::TanhDrift { a, .. } => 2.0 * a * math::tanh(x) * sech2(x),
            BuiltinModel::BoundedNonlinear { lambda, .. } => {
                let q = 1.0 + x * x;
                -2.0 * lambda * x * (x * x - 3.0) / (q * q * q)
            }
        }
    }

    fn sigma(&self, x: f64) -> f64 {
        match *self {
            BuiltinModel::OuLinear { sigma, .. } | BuiltinModel::TanhDrift { sigma, .. } => sigma,
            BuiltinModel::BoundedNonlinear { sigma0, sigma1, .. } => sigma0 + sigma1 / (1.0 + x * x),
        }
    }

    fn sigma_bounds(&self) -> (f64, f64) {
        match *self {
            BuiltinModel::OuLinear { sigma, .. } | BuiltinModel::TanhDrift { sigma, .. } => (sigma, sigma),
            BuiltinModel::BoundedNonlinear { sigma0, sigma1, .. } => (sigma0, sigma0 + sigma1),
        }
    }

    fn lipschitz_mu(&self) -> f64 {
        match *self {
            BuiltinModel::OuLinear { lambda, .. } => lambda,
            BuiltinModel::TanhDrift { a, .. } => a,
            // |(1 - x²)/(1 + x²)²| <= 1, attained at x = 0.
            BuiltinModel::BoundedNonlinear { lambda, c, .. } => lambda + c,
        }
    }
}

fn sech2(x: f64) -> f64 {
    let c = math::cosh(x);
    if c.is_finite() {
        1.0 / (c * c)
    } else {
        0.0
    }
}

/// Construct a registered model and run the assumption checks on it.
///
/// Missing parameters take defaults (`gamma = 0`, `lambda = 1`, `sigma = 1`,
/// `a = 1`, `c = 0.5`, `sigma0 = 0.5`, `sigma1 = 0.5`); unknown parameter
/// names are rejected.
pub fn builtin_model<I, K>(name: &str, params: I) -> Result<BuiltinModel>
where
    I: IntoIterator<Item = (K, f64)>,
    K: AsRef<str>,
{
    let allowed: &[&str] = match name {
        "ou_linear" => &["gamma", "lambda", "sigma"],
        "tanh_drift" => &["a", "sigma"],
        "bounded_nonlinear" => &["lambda", "c", "sigma0", "sigma1"],
        _ => {
            return Err(Error::Config(format!(
                "unknown model `{name}` (expected one of {})",
                MODEL_NAMES.join(", ")
            )))
        }
    };
    let mut given: Vec<(String, f64)> = Vec::new();
    for (k, v) in params {
        let k = k.as_ref();
        if !allowed.contains(&k) {
            return Err(Error::Config(format!(
                "model `{name}` has no parameter `{k}` (expected {})",
                allowed.join(", ")
            )));
        }
        if !v.is_finite() {
            return Err(Error::Config(format!("model parameter `{k}` must be finite, got {v}")));
        }
        given.push((k.to_string(), v));
    }
    let get = |key: &str, default: f64| given.iter().find(|(k, _)| k == key).map_or(default, |(_, v)| *v);
    let positive = |key: &str, v: f64| {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::Config(format!("model `{name}` requires {key} > 0, got {v}")))
        }
    };
    let model = match name {
        "ou_linear" => BuiltinModel::OuLinear {
            gamma: get("gamma", 0.0),
            lambda: positive("lambda", get("lambda", 1.0))?,
            sigma: positive("sigma", get("sigma", 1.0))?,
        },
        "tanh_drift" => BuiltinModel::TanhDrift {
            a: positive("a", get("a", 1.0))?,
            sigma: positive("sigma", get("sigma", 1.0))?,
        },
        _ => {
            let sigma1 = get("sigma1", 0.5);
            if sigma1 < 0.0 {
                return Err(Error::Config(format!(
                    "model `{name}` requires sigma1 >= 0, got {sigma1}"
                )));
            }
            let lambda = get("lambda", 1.0);
            if lambda < 0.0 {
                return Err(Error::Config(format!(
                    "model `{name}` requires lambda >= 0, got {lambda}"
                )));
            }
            BuiltinModel::BoundedNonlinear {
                lambda,
                c: positive("c", get("c", 0.5))?,
                sigma0: positive("sigma0", get("sigma0", 0.5))?,
                sigma1,
            }
        }
    };
    validate_model(&model)?;
    Ok(model)
}

/// Half-width and size of the grid used by [`validate_model`].
pub const VALIDATION_GRID: (f64, usize) = (50.0, 10_000);

/// Check the verifiable model assumptions on `[-50, 50]` (10⁴ points):
/// `σ₀ <= σ <= σ₁` with `σ₀ > 0`, `|μ'| <= L`, bounded `μ''`, and analytic
/// derivatives agreeing with central differences of `μ` to relative
/// tolerance 10⁻⁶ (absolute below magnitude 1).
pub fn validate_model<M: SdeModel + ?Sized>(model: &M) -> Result<()> {
    let name = model.name();
    let (s0, s1) = model.sigma_bounds();
    if !(s0 > 0.0 && s0 <= s1 && s1.is_finite()) {
        return Err(Error::Config(format!(
            "{name}: sigma bounds ({s0}, {s1}) violate 0 < s0 <= s1"
        )));
    }
    let lip = model.lipschitz_mu();
    let (half, points) = VALIDATION_GRID;
    for i in 0..points {
        let x = -half + 2.0 * half * i as f64 / (points - 1) as f64;
        let s = model.sigma(x);
        if !(s >= s0 * (1.0 - 1e-12) && s <= s1 * (1.0 + 1e-12)) {
            return Err(Error::Config(format!("{name}: sigma({x}) = {s} outside [{s0}, {s1}]")));
        }
        let d1 = model.mu_prime(x);
        let d2 = model.mu_double_prime(x);
        if !(d1.abs() <= lip * (1.0 + 1e-12)) || !d2.is_finite() {
            return Err(Error::Config(format!("{name}: derivative bound violated at x = {x}")));
        }
        // Fourth-order five-point stencils.
        let scale = x.abs().max(1.0);
        let s = 1e-3 * scale;
        let (m2, m1, m0, p1, p2) = (
            model.mu(x - 2.0 * s),
            model.mu(x - s),
            model.mu(x),
            model.mu(x + s),
            model.mu(x + 2.0 * s),
        );
        let fd1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * s);
        let s2 = 1e-2 * scale;
        let (m2, m1, p1, p2) = (
            model.mu(x - 2.0 * s2),
            model.mu(x - s2),
            model.mu(x + s2),
            model.mu(x + 2.0 * s2),
        );
        let fd2 = (-m2 + 16.0 * m1 - 30.0 * m0 + 16.0 * p1 - p2) / (12.0 * s2 * s2);
        if (fd1 - d1).abs() > 1e-6 * d1.abs().max(1.0) {
            return Err(Error::Config(format!(
                "{name}: mu_prime({x}) = {d1} disagrees with finite difference {fd1}"
            )));
        }
        if (fd2 - d2).abs() > 1e-6 * d2.abs().max(1.0) {
            return Err(Error::Config(format!(
                "{name}: mu_double_prime({x}) = {d2} disagrees with finite difference {fd2}"
            )));
        }
    }
    Ok(())
}

/// Where a stationary density came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityProvenance {
    /// Closed form.
    Analytic,
    /// Numeric Fourier inversion of a known characteristic function.
    NumericOracle,
    /// Kernel density estimate from a long simulated path.
    KernelPlugIn,
}

impl DensityProvenance {
    pub fn name(self) -> &'static str {
        match self {
            DensityProvenance::Analytic => "analytic",
            DensityProvenance::NumericOracle => "numeric-oracle",
            DensityProvenance::KernelPlugIn => "kernel-plug-in",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum DensityRepr {
    Gaussian {
        mean: f64,
        variance: f64,
    },
    /// `location + scale · S_α(1, β, 0)`.
    Stable {
        location: f64,
        scale: f64,
        params: StableParams,
    },
    /// Epanechnikov kernel estimate over a sorted sample.
    PlugIn {
        sorted: Vec<f64>,
        bandwidth: f64,
    },
}

/// The invariant density `f` and its derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDensity {
    repr: DensityRepr,
}

const FOURIER_TOL: Tolerance = Tolerance {
    abs: 1e-13,
    rel: 1e-10,
    max_intervals: 50_000,
};

impl StationaryDensity {
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !mean.is_finite() {
            return Err(Error::param(
                "variance",
                format!("need finite mean and variance > 0, got {mean}, {variance}"),
            ));
        }
        Ok(StationaryDensity {
            repr: DensityRepr::Gaussian { mean, variance },
        })
    }

    /// The law of `location + scale · Z`, `Z ~ S_α(1, β, 0)`, evaluated by
    /// Fourier inversion. Requires `alpha > 1`; construction checks that the
    /// inverted density integrates to one within 10⁻⁴.
    pub fn stable(location: f64, scale: f64, params: StableParams) -> Result<Self> {
        params.require_estimation_range()?;
        if !(scale > 0.0) || !scale.is_finite() || !location.is_finite() {
            return Err(Error::param(
                "scale",
                format!("need finite location and scale > 0, got {location}, {scale}"),
            ));
        }
        let density = StationaryDensity {
            repr: DensityRepr::Stable {
                location,
                scale,
                params,
            },
        };
        density.check_normalization()?;
        Ok(density)
    }

    /// Epanechnikov kernel estimate from `sample`. Without an explicit
    /// bandwidth, uses `0.9 · min(sd, IQR/1.34) · n^(-1/5)`.
    pub fn plug_in(sample: &[f64], bandwidth: Option<f64>) -> Result<Self> {
        if sample.len() < 2 {
            return Err(Error::EmptyInput("plug-in density needs at least two observations"));
        }
        if sample.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("sample", "contains non-finite values"));
        }
        let mut sorted = sample.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let bandwidth = match bandwidth {
            Some(h) if h > 0.0 && h.is_finite() => h,
            Some(h) => return Err(Error::param("bandwidth", format!("must be positive, got {h}"))),
            None => default_bandwidth(&sorted)?,
        };
        Ok(StationaryDensity {
            repr: DensityRepr::PlugIn { sorted, bandwidth },
        })
    }

    pub fn provenance(&self) -> DensityProvenance {
        match self.repr {
            DensityRepr::Gaussian { .. } => DensityProvenance::Analytic,
            DensityRepr::Stable { .. } => DensityProvenance::NumericOracle,
            DensityRepr::PlugIn { .. } => DensityProvenance::KernelPlugIn,
        }
    }

    /// Bandwidth of a plug-in estimate.
    pub fn bandwidth(&self) -> Option<f64> {
        match self.repr {
            DensityRepr::PlugIn { bandwidth, .. } => Some(bandwidth),
            _ => None,
        }
    }

    pub fn f(&self, x: f64) -> Result<f64> {
        match &self.repr {
            DensityRepr::Gaussian { mean, variance } => Ok(math::normal_pdf(x, *mean, *variance)),
            DensityRepr::Stable {
                location,
                scale,
                params,
            } => Ok(stable_pdf(params, (x - location) / scale)?.max(0.0) / scale),
            DensityRepr::PlugIn { sorted, bandwidth } => {
                Ok(plug_in_sum(sorted, *bandwidth, x, |u| 0.75 * (1.0 - u * u)))
            }
        }
    }

    pub fn f_prime(&self, x: f64) -> Result<f64> {
        match &self.repr {
            DensityRepr::Gaussian { mean, variance } => {
                Ok(-(x - mean) / variance * math::normal_pdf(x, *mean, *variance))
            }
            DensityRepr::Stable {
                location,
                scale,
                params,
            } => Ok(stable_pdf_prime(params, (x - location) / scale)? / (scale * scale)),
            // d/dx K((X_i - x)/h) / h = -K'(u) / h² with K'(u) = -1.5u.
            DensityRepr::PlugIn { sorted, bandwidth } => {
                Ok(plug_in_sum(sorted, *bandwidth, x, |u| 1.5 * u) / bandwidth)
            }
        }
    }

    /// Cumulative distribution function. Not available for plug-in
    /// estimates.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        match &self.repr {
            DensityRepr::Gaussian { mean, variance } => Ok(math::normal_cdf(x - mean, *variance)),
            DensityRepr::Stable {
                location,
                scale,
                params,
            } => Ok(stable_cdf(params, (x - location) / scale)?.clamp(0.0, 1.0)),
            DensityRepr::PlugIn { .. } => Err(Error::Config("cdf is not available for a plug-in density".into())),
        }
    }

    fn check_normalization(&self) -> Result<()> {
        let DensityRepr::Stable { location, scale, .. } = self.repr else {
            return Ok(());
        };
        let (lo, hi) = (location - 20.0 * scale, location + 20.0 * scale);
        let mut err = None;
        let body = quad::integrate(
            |x| match self.f(x) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            },
            lo,
            hi,
            Tolerance::new(1e-9, 1e-9),
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        let tails = self.cdf(lo)? + (1.0 - self.cdf(hi)?);
        let total = body.value + tails;
        if (total - 1.0).abs() > 1e-4 {
            return Err(Error::Numeric(format!(
                "Fourier-inverted density integrates to {total}, not 1"
            )));
        }
        Ok(())
    }
}

fn plug_in_sum(sorted: &[f64], h: f64, x: f64, weight: impl Fn(f64) -> f64) -> f64 {
    let lo = sorted.partition_point(|&v| v < x - h);
    let hi = sorted.partition_point(|&v| v <= x + h);
    let s: f64 = sorted[lo..hi].iter().map(|&v| weight((v - x) / h)).sum();
    s / (sorted.len() as f64 * h)
}

fn default_bandwidth(sorted: &[f64]) -> Result<f64> {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let sd = math::sqrt(sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0));
    let q = |p: f64| sorted[((p * (n - 1.0)) as usize).min(sorted.len() - 1)];
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let h = 0.9 * spread * math::powf(n, -0.2);
    if h > 0.0 && h.is_finite() {
        Ok(h)
    } else {
        Err(Error::Numeric(format!(
            "cannot choose a plug-in bandwidth (spread {spread})"
        )))
    }
}

// For v > 0 the standard characteristic function is exp(-v^α + i θ v^α) with
// θ = β tan(απ/2), so
//   f(y)  = (1/π) ∫₀^∞ e^{-v^α} cos(θ v^α - v y) dv,
//   f'(y) = (1/π) ∫₀^∞ e^{-v^α} v sin(θ v^α - v y) dv,
//   F(y)  = 1/2 - (1/π) ∫₀^∞ e^{-v^α} sin(θ v^α - v y) / v dv.

fn fourier_integral(params: &StableParams, y: f64, integrand: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let alpha = params.alpha();
    let theta = params.beta() * math::tan_half_pi_alpha(alpha);
    let v_max = math::powf(45.0, 1.0 / alpha);
    // Start from pieces no longer than half an oscillation period.
    let pieces = (math::ceil(v_max * y.abs().max(1.0) / math::PI) as usize).clamp(8, 20_000);
    let breaks: Vec<f64> = (0..=pieces).map(|k| v_max * k as f64 / pieces as f64).collect();
    let tol = Tolerance {
        max_intervals: FOURIER_TOL.max_intervals.max(4 * pieces),
        ..FOURIER_TOL
    };
    let r = quad::integrate_with_breaks(
        |v| {
            let va = math::powf(v, alpha);
            math::exp(-va) * integrand(v, theta * va - v * y)
        },
        &breaks,
        tol,
    )
    .map_err(|e| Error::Numeric(format!("Fourier inversion at y = {y}: {e}")))?;
    Ok(r.value / math::PI)
}

fn stable_pdf(params: &StableParams, y: f64) -> Result<f64> {
    fourier_integral(params, y, |_, phase| math::cos(phase))
}

fn stable_pdf_prime(params: &StableParams, y: f64) -> Result<f64> {
    fourier_integral(params, y, |v, phase| v * math::sin(phase))
}

fn stable_cdf(params: &StableParams, y: f64) -> Result<f64> {
    let i = fourier_integral(params, y, |v, phase| if v == 0.0 { 0.0 } else { math::sin(phase) / v })?;
    Ok(0.5 - i)
}

/// How to obtain a stationary density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityMethod {
    /// Exact law for `ou_linear` (Gaussian closed form at α = 2, Fourier
    /// inversion otherwise).
    Oracle,
    /// Kernel plug-in from one long simulated path.
    Simulation { path: PathConfig, bandwidth: Option<f64> },
}

/// Stationary density of `model` driven by `noise`.
///
/// For `ou_linear` the invariant law is `γ/λ + σ (αλ)^(-1/α) S_α(1, β, 0)`;
/// at α = 2 this is Normal(γ/λ, σ²/λ).
pub fn stationary_density_oracle(
    model: &BuiltinModel,
    noise: &StableParams,
    method: DensityMethod,
) -> Result<StationaryDensity> {
    match method {
        DensityMethod::Oracle => match *model {
            BuiltinModel::OuLinear { gamma, lambda, sigma } => {
                let location = gamma / lambda;
                if noise.is_gaussian() {
                    StationaryDensity::gaussian(location, sigma * sigma / lambda)
                } else {
                    let scale = sigma / math::powf(noise.alpha() * lambda, 1.0 / noise.alpha());
                    StationaryDensity::stable(location, scale, *noise)
                }
            }
            _ => Err(Error::Config(format!(
                "no closed-form stationary law for `{}`; use the simulation route",
                model.name()
            ))),
        },
        DensityMethod::Simulation { path, bandwidth } => {
            let p = simulate_path(model, noise, &path)?;
            StationaryDensity::plug_in(&p.x, bandwidth)
        }
    }
}
