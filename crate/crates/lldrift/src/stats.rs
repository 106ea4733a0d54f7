//! Summary statistics over replicate samples.

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Sorted copy, NaN-free input assumed.
pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    Some(xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let s = sorted(xs);
    let m = s.len() / 2;
    Some(if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    })
}

/// Standard error of the sample median from the distribution-free 95%
/// order-statistic interval: `(X_(u) - X_(l)) / (2 · 1.96)` with
/// `l, u = N/2 ∓ 1.96 √N / 2` (1-based, clamped to the sample).
pub fn median_standard_error(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let s = sorted(xs);
    let n = s.len() as f64;
    let half = Z95 * n.sqrt() / 2.0;
    let l = ((n / 2.0 - half).floor() as usize).max(1);
    let u = ((1.0 + n / 2.0 + half).ceil() as usize).min(s.len());
    Some((s[u - 1] - s[l - 1]) / (2.0 * Z95))
}

/// `sqrt(mean(e²))`.
pub fn rmse(errors: &[f64]) -> Option<f64> {
    let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
    mean(&sq).map(f64::sqrt)
}

/// `sqrt(median(e²))`, a tail-robust error scale.
pub fn root_median_square(errors: &[f64]) -> Option<f64> {
    let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
    median(&sq).map(f64::sqrt)
}

/// Empirical quantile by linear interpolation between order statistics.
pub fn quantile(xs: &[f64], p: f64) -> Option<f64> {
    if xs.is_empty() || !(0.0..=1.0).contains(&p) {
        return None;
    }
    let s = sorted(xs);
    let pos = p * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(s[lo] + (pos - lo as f64) * (s[hi] - s[lo]))
}

pub fn iqr(xs: &[f64]) -> Option<f64> {
    Some(quantile(xs, 0.75)? - quantile(xs, 0.25)?)
}

/// Order-statistic ranks used by [`tail_slope`], as fractions of the sample.
pub const TAIL_RANKS: (f64, f64) = (0.02, 0.5);

/// Tail index estimate from a log-log fit of the empirical survival function
/// of `|z|`.
///
/// With `|z|` sorted in decreasing order, rank `r` (0-based) has survival
/// `(r + 1/2)/N`; the least-squares slope of `ln S` on `ln |z|` over ranks
/// `[⌈0.02N⌉, ⌊0.5N⌋)` is negated. On exact `S_α` samples of size 500 this
/// averages roughly 1.15, 1.56, 1.99 for α = 1.2, 1.5, 1.8.
pub fn tail_slope(sample: &[f64]) -> Option<f64> {
    let mut z: Vec<f64> = sample.iter().map(|v| v.abs()).collect();
    z.sort_unstable_by(|a, b| b.total_cmp(a));
    let n = z.len() as f64;
    let lo = (TAIL_RANKS.0 * n).ceil() as usize;
    let hi = (TAIL_RANKS.1 * n).floor() as usize;
    let pts: Vec<(f64, f64)> = (lo..hi.min(z.len()))
        .filter(|&r| z[r] > 0.0)
        .map(|r| (z[r].ln(), ((r as f64 + 0.5) / n).ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx > 0.0 {
        Some(-sxy / sxx)
    } else {
        None
    }
}
