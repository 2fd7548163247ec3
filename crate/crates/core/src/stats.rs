//! Small numerical helpers shared by the estimators.

/// `ln Σ exp(x_i)`; `-∞` for an empty slice or all `-∞` entries.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if m == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Kish effective sample size `(Σw)² / Σw²` from log-weights.
pub fn ess_from_log_weights(log_w: &[f64]) -> f64 {
    let m = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return 0.0;
    }
    let (mut s1, mut s2) = (0.0, 0.0);
    for &lw in log_w {
        let w = (lw - m).exp();
        s1 += w;
        s2 += w * w;
    }
    s1 * s1 / s2
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Means of `batches` contiguous, near-equal batches (fewer when the series
/// is shorter than `batches`).
pub fn batch_means(xs: &[f64], batches: usize) -> Vec<f64> {
    let n = xs.len();
    let b = batches.min(n).max(1);
    if n == 0 {
        return Vec::new();
    }
    (0..b)
        .map(|k| {
            let lo = k * n / b;
            let hi = (k + 1) * n / b;
            mean(&xs[lo..hi])
        })
        .collect()
}

/// Standard error of the mean of an autocorrelated series by batch means.
pub fn batch_means_se(xs: &[f64], batches: usize) -> f64 {
    let bm = batch_means(xs, batches);
    let b = bm.len();
    if b < 2 {
        return 0.0;
    }
    let m = mean(&bm);
    let var = bm.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

/// Linear-interpolated quantile, `q ∈ [0, 1]`; NaNs are ignored.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = xs.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

pub fn iqr(xs: &[f64]) -> f64 {
    quantile(xs, 0.75) - quantile(xs, 0.25)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn logsumexp_edges() {
        assert_eq!(logsumexp(&[]), f64::NEG_INFINITY);
        assert_eq!(logsumexp(&[f64::NEG_INFINITY, 0.0]), 0.0);
        assert!((logsumexp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn ess_bounds() {
        assert!((ess_from_log_weights(&[0.0; 10]) - 10.0).abs() < 1e-12);
        assert!((ess_from_log_weights(&[0.0, -1e4, -1e4]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantiles() {
        let v = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(median(&v), 2.5);
        assert_eq!(iqr(&[1.0, 2.0, 3.0, 4.0, 5.0]), 2.0);
    }

    #[test]
    fn batch_se_of_constant_is_zero() {
        assert_eq!(batch_means_se(&[2.0; 100], 30), 0.0);
        assert_eq!(batch_means(&[1.0, 2.0, 3.0], 30).len(), 3);
    }

    proptest! {
        #[test]
        fn logsumexp_matches_naive(xs in prop::collection::vec(-20.0f64..20.0, 1..30)) {
            let naive = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
            prop_assert!((logsumexp(&xs) - naive).abs() < 1e-10);
        }

        #[test]
        fn ess_within_count(xs in prop::collection::vec(-5.0f64..5.0, 1..50)) {
            let e = ess_from_log_weights(&xs);
            prop_assert!(e >= 1.0 - 1e-9 && e <= xs.len() as f64 + 1e-9);
        }
    }
}
