//! Kolmogorov–Smirnov distances between empirical distributions.

use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

fn sorted_copy(xs: &[f64], what: &'static str) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::EmptyInput(what));
    }
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::param(what, "sample contains NaN"));
    }
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    Ok(v)
}

/// Supremum distance between the empirical CDFs of `a` and `b`, in `[0, 1]`.
///
/// Ties (within or across samples) are handled by advancing both step
/// functions past every copy of the current value before comparing.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted_copy(a, "a")?;
    let b = sorted_copy(b, "b")?;
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// Supremum distance between the empirical CDF of `sample` and `cdf`.
pub fn one_sample_ks<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    let s = sorted_copy(sample, "sample")?;
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in s.iter().enumerate() {
        let fx = cdf(x);
        d = d.max((fx - k as f64 / n).abs()).max(((k + 1) as f64 / n - fx).abs());
    }
    Ok(d)
}

/// Asymptotic coefficient `c(a) = sqrt(-ln(a / 2) / 2)` of the KS test at
/// significance level `a` (1.628 at 1%, 1.358 at 5%).
pub fn ks_coefficient(significance: f64) -> f64 {
    math::sqrt(-math::ln(significance / 2.0) / 2.0)
}

/// Large-sample two-sample KS critical value at the given significance.
pub fn two_sample_critical_value(n: usize, m: usize, significance: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ks_coefficient(significance) * math::sqrt((n + m) / (n * m))
}

/// Large-sample one-sample KS critical value at the given significance.
pub fn one_sample_critical_value(n: usize, significance: f64) -> f64 {
    ks_coefficient(significance) / math::sqrt(n as f64)
}

/// Exact critical value of `two_sample_ks(z, -z)` for a sample of size `n`
/// from a continuous law symmetric about zero.
///
/// Comparing a sample with its own negation is not a two-sample test of
/// independent samples. Ordering by `|z|` decreasing, `n · D` is
/// `max_k |S_k|` for the partial sums `S_k` of the signs, which are i.i.d.
/// ±1 under symmetry. The returned value is `m / n` for the smallest integer
/// `m` with `P(max_k |S_k| >= m) <= significance`, computed by propagating
/// the walk with absorbing barriers at `±m`. For large `n` it approaches
/// `2.807 / sqrt(n)` at 1% (the supremum of `|B|` on `[0, 1]`).
pub fn symmetry_critical_value(n: usize, significance: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyInput("sample"));
    }
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::param("significance", "must lie in (0, 1)"));
    }
    for m in 1..=n + 1 {
        if max_walk_exceedance(n, m) <= significance {
            return Ok(m as f64 / n as f64);
        }
    }
    Ok((n + 1) as f64 / n as f64)
}

/// `P(max_{k <= n} |S_k| >= m)` for a simple symmetric random walk.
fn max_walk_exceedance(n: usize, m: usize) -> f64 {
    // States -(m-1)..=(m-1), offset by m-1.
    let width = 2 * m - 1;
    let mut p = alloc::vec![0.0f64; width];
    let mut q = alloc::vec![0.0f64; width];
    p[m - 1] = 1.0;
    let mut absorbed = 0.0;
    for _ in 0..n {
        q.iter_mut().for_each(|v| *v = 0.0);
        for (i, &pi) in p.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            let half = 0.5 * pi;
            if i == 0 {
                absorbed += half;
            } else {
                q[i - 1] += half;
            }
            if i + 1 == width {
                absorbed += half;
            } else {
                q[i + 1] += half;
            }
        }
        core::mem::swap(&mut p, &mut q);
    }
    absorbed
}
