//! Compactly supported kernels and the constants built from them.
//!
//! For a kernel density `K` we use `K_j = ∫ u^j K(u) du` (j = 1, 2, 3),
//! `∫ K²`, and the two fractional integrals that enter the stable-limit
//! scales: `∫ K^α(u) |K₂ - u K₁|^α du` (local linear) and `∫ K^α(u) du`
//! (Nadaraya–Watson).

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::math;
use crate::quad::{self, Tolerance};
use crate::{Error, Result};

const FRACTIONAL_TOL: Tolerance = Tolerance::relative(1e-8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// (3/4)(1 - u²) on [-1, 1].
    Epanechnikov,
    /// 1 - |u| on [-1, 1].
    Triangular,
    /// 1/2 on [-1, 1].
    UniformSym,
    /// 1 on [0, 1]; one-sided, K₁ = 1/2.
    UniformRight,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Epanechnikov,
        KernelKind::Triangular,
        KernelKind::UniformSym,
        KernelKind::UniformRight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Epanechnikov => "epanechnikov",
            KernelKind::Triangular => "triangular",
            KernelKind::UniformSym => "uniform_sym",
            KernelKind::UniformRight => "uniform_right",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown kernel `{s}` (expected one of epanechnikov, triangular, uniform_sym, uniform_right)"
            ))
        })
    }
}

/// A kernel with its analytic constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    kind: KernelKind,
    support: (f64, f64),
    moments: [f64; 3],
    l2: f64,
    max_value: f64,
}

impl Kernel {
    pub fn new(kind: KernelKind) -> Self {
        let (support, moments, l2, max_value) = match kind {
            KernelKind::Epanechnikov => ((-1.0, 1.0), [0.0, 0.2, 0.0], 0.6, 0.75),
            KernelKind::Triangular => ((-1.0, 1.0), [0.0, 1.0 / 6.0, 0.0], 2.0 / 3.0, 1.0),
            KernelKind::UniformSym => ((-1.0, 1.0), [0.0, 1.0 / 3.0, 0.0], 0.5, 0.5),
            KernelKind::UniformRight => ((0.0, 1.0), [0.5, 1.0 / 3.0, 0.25], 1.0, 1.0),
        };
        Kernel {
            kind,
            support,
            moments,
            l2,
            max_value,
        }
    }

    /// Look a kernel up by its configuration name.
    pub fn builtin(name: &str) -> Result<Self> {
        name.parse().map(Kernel::new)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    #[inline]
    pub fn evaluate(&self, u: f64) -> f64 {
        match self.kind {
            KernelKind::Epanechnikov if u.abs() <= 1.0 => 0.75 * (1.0 - u * u),
            KernelKind::Triangular if u.abs() <= 1.0 => 1.0 - u.abs(),
            KernelKind::UniformSym if u.abs() <= 1.0 => 0.5,
            KernelKind::UniformRight if (0.0..=1.0).contains(&u) => 1.0,
            _ => 0.0,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn is_symmetric(&self) -> bool {
        self.kind != KernelKind::UniformRight
    }

    /// `K_j = ∫ u^j K(u) du` for `j` in 0..=3.
    pub fn moment(&self, j: usize) -> f64 {
        match j {
            0 => 1.0,
            1..=3 => self.moments[j - 1],
            _ => panic!("kernel moments are tabulated for j <= 3"),
        }
    }

    pub fn k1(&self) -> f64 {
        self.moments[0]
    }

    pub fn k2(&self) -> f64 {
        self.moments[1]
    }

    pub fn k3(&self) -> f64 {
        self.moments[2]
    }

    /// `∫ K²`.
    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    /// `K₂ - K₁²`, strictly positive for every built-in kernel.
    pub fn variance(&self) -> f64 {
        self.k2() - self.k1() * self.k1()
    }

    /// Support endpoints plus interior points where the kernel is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let (a, b) = self.support;
        if self.kind == KernelKind::Triangular {
            alloc::vec![a, 0.0, b]
        } else {
            alloc::vec![a, b]
        }
    }
}

/// `K_h(v) = K(v / h) / h`.
pub fn scaled_eval(kernel: &Kernel, h: f64, v: f64) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::param(
            "h",
            format!("bandwidth must be positive and finite, got {h}"),
        ));
    }
    Ok(kernel.evaluate(v / h) / h)
}

/// Value of `∫ K^α(u) |K₂ - u K₁|^α du`, with a flag recording whether
/// `K₂ - u K₁` changes sign on the support (so the absolute value mattered).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalIntegral {
    pub value: f64,
    pub sign_changes: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (1.0..=2.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::param("alpha", format!("{alpha} not in [1, 2]")))
    }
}

/// `∫ K^α(u) {K₂ - u K₁}^α du`, evaluated as `|K₂ - u K₁|^α`.
pub fn lambda_fractional_integral(kernel: &Kernel, alpha: f64) -> Result<FractionalIntegral> {
    check_alpha(alpha)?;
    let (k1, k2) = (kernel.k1(), kernel.k2());
    let mut breaks = kernel.breakpoints();
    let (a, b) = kernel.support();
    let mut sign_changes = false;
    if k1 != 0.0 {
        let root = k2 / k1;
        if root > a && root < b {
            sign_changes = true;
            breaks.push(root);
            breaks.sort_unstable_by(f64::total_cmp);
        }
    }
    let integrand = |u: f64| {
        let k = kernel.evaluate(u);
        if k == 0.0 {
            0.0
        } else {
            math::powf(k * (k2 - u * k1).abs(), alpha)
        }
    };
    let r = quad::integrate_with_breaks(integrand, &breaks, FRACTIONAL_TOL)?;
    Ok(FractionalIntegral {
        value: r.value,
        sign_changes,
    })
}

/// `∫ K^α(u) du`.
pub fn nw_fractional_integral(kernel: &Kernel, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let integrand = |u: f64| math::powf(kernel.evaluate(u), alpha);
    Ok(quad::integrate_with_breaks(integrand, &kernel.breakpoints(), FRACTIONAL_TOL)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_moment(k: &Kernel, j: i32) -> f64 {
        quad::integrate_with_breaks(
            |u| libm::pow(u, j as f64) * k.evaluate(u),
            &k.breakpoints(),
            Tolerance::new(1e-14, 1e-12),
        )
        .unwrap()
        .value
    }

    #[test]
    fn lookup_by_name() {
        for kind in KernelKind::ALL {
            assert_eq!(Kernel::builtin(kind.name()).unwrap().kind(), kind);
        }
        assert!(matches!(Kernel::builtin("gaussian"), Err(Error::Config(_))));
    }

    #[test]
    fn densities_with_compact_support() {
        for kind in KernelKind::ALL {
            let k = Kernel::new(kind);
            assert!((quad_moment(&k, 0) - 1.0).abs() < 1e-8, "{kind}");
            let (a, b) = k.support();
            for i in -300..=300 {
                let u = i as f64 / 100.0;
                let v = k.evaluate(u);
                assert!(v >= 0.0);
                if u < a || u > b {
                    assert_eq!(v, 0.0, "{kind} at {u}");
                }
                assert!(v <= k.max_value());
            }
        }
    }

    #[test]
    fn stored_moments_match_quadrature() {
        for kind in KernelKind::ALL {
            let k = Kernel::new(kind);
            for j in 1..=3 {
                assert!((quad_moment(&k, j) - k.moment(j as usize)).abs() < 1e-8, "{kind} K{j}");
            }
            let l2 =
                quad::integrate_with_breaks(|u| k.evaluate(u).powi(2), &k.breakpoints(), Tolerance::relative(1e-12))
                    .unwrap()
                    .value;
            assert!((l2 - k.l2()).abs() < 1e-8, "{kind} l2");
            assert!(k.variance() > 0.0);
            if k.is_symmetric() {
                assert_eq!(k.k1(), 0.0);
                assert_eq!(k.k3(), 0.0);
            }
        }
    }

    #[test]
    fn closed_form_moments() {
        let e = Kernel::new(KernelKind::Epanechnikov);
        assert_eq!((e.k1(), e.k3()), (0.0, 0.0));
        assert!((e.k2() - 0.2).abs() < 1e-15 && (e.l2() - 0.6).abs() < 1e-15);
        let r = Kernel::new(KernelKind::UniformRight);
        assert_eq!((r.k1(), r.k2(), r.k3()), (0.5, 1.0 / 3.0, 0.25));
        assert!(!r.is_symmetric());
    }

    #[test]
    fn scaled_evaluation() {
        let u = Kernel::new(KernelKind::UniformSym);
        assert_eq!(scaled_eval(&u, 2.0, 0.0).unwrap(), 0.25);
        let e = Kernel::new(KernelKind::Epanechnikov);
        assert!((scaled_eval(&e, 0.5, 0.25).unwrap() - 1.125).abs() < 1e-15);
        for kind in KernelKind::ALL {
            let k = Kernel::new(kind);
            for v in [-0.7, 0.0, 0.3, 0.99] {
                assert_eq!(scaled_eval(&k, 1.0, v).unwrap(), k.evaluate(v));
            }
        }
        assert!(scaled_eval(&e, 0.0, 0.1).is_err());
        assert!(scaled_eval(&e, -1.0, 0.1).is_err());
    }

    #[test]
    fn nw_integral_closed_forms() {
        let u = Kernel::new(KernelKind::UniformSym);
        let v = nw_fractional_integral(&u, 1.5).unwrap();
        assert!((v - 2.0f64.powf(-0.5)).abs() < 1e-10);
        for kind in KernelKind::ALL {
            let k = Kernel::new(kind);
            assert!((nw_fractional_integral(&k, 1.0).unwrap() - 1.0).abs() < 1e-10);
            assert!((nw_fractional_integral(&k, 2.0).unwrap() - k.l2()).abs() < 1e-10);
        }
        let e = Kernel::new(KernelKind::Epanechnikov);
        assert!((nw_fractional_integral(&e, 2.0).unwrap() - 0.6).abs() < 1e-10);
        assert!(nw_fractional_integral(&e, 0.5).is_err());
    }

    #[test]
    fn lambda_integral_symmetric_reduction() {
        let u = Kernel::new(KernelKind::UniformSym);
        let r = lambda_fractional_integral(&u, 1.5).unwrap();
        let expected = (1.0f64 / 3.0).powf(1.5) * 2.0f64.powf(-0.5);
        assert!((r.value - expected).abs() < 1e-10 * expected);
        assert!(!r.sign_changes);
        for kind in [KernelKind::Epanechnikov, KernelKind::Triangular, KernelKind::UniformSym] {
            let k = Kernel::new(kind);
            for alpha in [1.0, 1.2, 1.5, 1.8, 2.0] {
                let ll = lambda_fractional_integral(&k, alpha).unwrap().value;
                let nw = nw_fractional_integral(&k, alpha).unwrap();
                let reduced = k.k2().powf(alpha) * nw;
                assert!((ll - reduced).abs() <= 1e-8 * reduced, "{kind} alpha {alpha}");
            }
        }
    }

    #[test]
    fn lambda_integral_one_sided_kernel() {
        // |1/3 - u/2| on [0, 1]: 1/9 below the root u = 2/3, 1/36 above.
        let r = lambda_fractional_integral(&Kernel::new(KernelKind::UniformRight), 1.0).unwrap();
        assert!(r.sign_changes);
        assert!((r.value - 5.0 / 36.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_integral_gaussian_endpoint() {
        let e = Kernel::new(KernelKind::Epanechnikov);
        let r = lambda_fractional_integral(&e, 2.0).unwrap();
        assert!((r.value - 3.0 / 125.0).abs() < 1e-12);
        let near = lambda_fractional_integral(&e, 2.0 - 1e-9).unwrap();
        assert!((near.value - 3.0 / 125.0).abs() < 1e-9);
    }
}
