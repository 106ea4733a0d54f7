//! Euler paths of `dX = μ(X-) dt + σ(X-) dZ` observed at `t_i = iΔ`.
//!
//! One step is `X_{i+1} = X_i + μ(X_i) Δ + σ(X_i) Δ^{1/α} ξ_i` with
//! `ξ_i ~ S_α(1, β, 0)`; by self-similarity `Δ^{1/α} ξ_i` has exactly the
//! law of a driving-noise increment over `Δ`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::math;
use crate::models::SdeModel;
use crate::rng::stream;
use crate::stable::{StableParams, StableSampler};
use crate::{Error, Result};

/// States larger than this abort the simulation.
pub const OVERFLOW_GUARD: f64 = 1e12;

/// Default number of discarded initial steps.
pub const DEFAULT_BURN_IN: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    pub x0: f64,
    /// Number of steps after burn-in; the path holds `n + 1` observations.
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
    pub burn_in: usize,
}

/// Observations `X_{t_0}, ..., X_{t_n}` with `t_i = iΔ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedPath {
    pub x: Vec<f64>,
    pub delta: f64,
    pub seed: u64,
    pub model_name: String,
    pub noise: StableParams,
}

impl ObservedPath {
    /// Wrap existing observations (e.g. read from a file).
    pub fn from_observations(x: Vec<f64>, delta: f64, noise: StableParams, model_name: &str) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::EmptyInput("a path needs at least two observations"));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::param("delta", format!("must be positive, got {delta}")));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::param("x", format!("observation {i} is not finite")));
        }
        Ok(ObservedPath {
            x,
            delta,
            seed: 0,
            model_name: model_name.to_string(),
            noise,
        })
    }

    /// Number of steps `n` (one less than the number of observations).
    pub fn n(&self) -> usize {
        self.x.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.n() as f64 * self.delta
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.delta
    }

    /// The regression pairs `(X_i, (X_{i+1} - X_i)/Δ)` for `i < n`.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let inv = 1.0 / self.delta;
        self.x.windows(2).map(move |w| (w[0], (w[1] - w[0]) * inv))
    }
}

/// Simulate a path. The first `burn_in` steps are discarded, so `x[0]` is
/// the state after burn-in.
pub fn simulate_path<M: SdeModel + ?Sized>(model: &M, noise: &StableParams, cfg: &PathConfig) -> Result<ObservedPath> {
    noise.require_estimation_range()?;
    if cfg.n < 1 {
        return Err(Error::param("n", "need at least one step"));
    }
    if !(cfg.delta > 0.0) || !cfg.delta.is_finite() {
        return Err(Error::param("delta", format!("must be positive, got {}", cfg.delta)));
    }
    if !cfg.x0.is_finite() {
        return Err(Error::param("x0", "must be finite"));
    }
    let sampler = StableSampler::new(*noise);
    let mut rng = stream(cfg.seed);
    let scale = math::powf(cfg.delta, 1.0 / noise.alpha());
    let delta = cfg.delta;
    let step = |x: f64, k: usize, rng: &mut _| -> Result<f64> {
        let next = x + model.mu(x) * delta + model.sigma(x) * scale * sampler.sample(rng);
        if next.is_finite() && next.abs() <= OVERFLOW_GUARD {
            Ok(next)
        } else {
            Err(Error::Simulation { step: k, state: next })
        }
    };

    let mut state = cfg.x0;
    for k in 0..cfg.burn_in {
        state = step(state, k, &mut rng)?;
    }
    let mut x = Vec::with_capacity(cfg.n + 1);
    x.push(state);
    for k in 0..cfg.n {
        state = step(state, cfg.burn_in + k, &mut rng)?;
        x.push(state);
    }
    Ok(ObservedPath {
        x,
        delta,
        seed: cfg.seed,
        model_name: model.name().to_string(),
        noise: *noise,
    })
}
