//! Small statistical helpers for experiment reports.

/// Half-width of the 95% Wilson score interval for `successes / trials`.
///
/// Wilson rather than the normal approximation: it stays valid when the
/// frequency sits near 0 or 1, which is exactly where election success
/// rates live.
pub fn wilson_halfwidth(successes: u64, trials: u64) -> f64 {
    assert!(trials > 0 && successes <= trials);
    let z = 1.959_963_984_540_054_f64; // 97.5th normal percentile
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// Nearest-rank quantile of a sorted sample: the smallest element with at
/// least a `q` fraction of the sample at or below it.
pub fn quantile_sorted(sorted: &[u64], q: f64) -> u64 {
    assert!(!sorted.is_empty());
    assert!((0.0..=1.0).contains(&q));
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_halfwidth_matches_hand_computation() {
        // p = 0.5, n = 100: half-width = z*sqrt(0.25/100 + z^2/40000)/(1+z^2/100)
        let hw = wilson_halfwidth(50, 100);
        assert!((hw - 0.0958).abs() < 1e-3, "{hw}");
        // Extreme frequency stays inside [0, 1].
        let hw = wilson_halfwidth(100, 100);
        assert!(hw > 0.0 && hw < 0.05);
    }

    #[test]
    fn quantiles_are_nearest_rank() {
        let v: Vec<u64> = (1..=100).collect();
        assert_eq!(quantile_sorted(&v, 0.50), 50);
        assert_eq!(quantile_sorted(&v, 0.90), 90);
        assert_eq!(quantile_sorted(&v, 0.99), 99);
        assert_eq!(quantile_sorted(&v, 1.0), 100);
        assert_eq!(quantile_sorted(&[7], 0.5), 7);
    }

    #[test]
    fn quantiles_are_monotone_in_q() {
        let v = vec![3u64, 3, 5, 9, 20, 20, 21, 40];
        let qs = [0.1, 0.5, 0.9, 0.99, 1.0];
        let vals: Vec<u64> = qs.iter().map(|&q| quantile_sorted(&v, q)).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }
}
