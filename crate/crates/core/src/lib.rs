//! Local linear drift estimation for stochastic differential equations driven
//! by α-stable Lévy motion.
//!
//! The crate is `no_std` (it needs `alloc`) and covers the numerical side of
//! the problem:
//!
//! - [`stable`]: standard α-stable variates `S_α(1, β, 0)`, their
//!   characteristic function, and the two-sample Kolmogorov–Smirnov distance
//!   used to compare samples against the stable law.
//! - [`models`]: built-in drift/diffusion specifications and the stationary
//!   density oracles used by the limit constants.
//! - [`simulate`]: Euler paths with exact-law stable increments.
//! - [`kernels`]: compactly supported kernels and their moment constants.
//! - [`estimate`]: the local linear and Nadaraya–Watson drift estimators and
//!   the asymptotic standardization constants.
//!
//! IO, configuration and the Monte Carlo drivers live in the `lldrift` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

mod error;
pub mod estimate;
pub mod kernels;
pub mod math;
pub mod models;
pub mod quad;
pub mod rng;
pub mod simulate;
pub mod stable;

pub use error::{Error, Result};
pub use estimate::{
    asymptotic_constants, density_estimate, drift_curve, fit_pairs, kernel_moment_sum, local_linear_drift,
    local_linear_literal, nadaraya_watson_drift, nw_asymptotic_constants, s_nk, AsymptoticConstants, DriftEstimate,
    Method, NwAsymptoticConstants,
};
pub use kernels::{
    lambda_fractional_integral, nw_fractional_integral, scaled_eval, FractionalIntegral, Kernel, KernelKind,
};
pub use models::{
    builtin_model, stationary_density_oracle, BuiltinModel, DensityMethod, DensityProvenance, SdeModel,
    StationaryDensity,
};
pub use rng::{derive_replicate_seed, stream, StreamRng};
pub use simulate::{simulate_path, ObservedPath, PathConfig};
pub use stable::{
    empirical_char_fn, ks_coefficient, one_sample_critical_value, one_sample_ks, sample_standard_stable,
    symmetry_critical_value, theoretical_char_fn, two_sample_critical_value, two_sample_ks, StableParams,
    StableSampler,
};
