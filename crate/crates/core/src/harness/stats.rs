//! Means and normal-approximation 95% confidence intervals.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Mean and 95% CI half-width `z s / sqrt(t)` (sample standard deviation).
/// The half-width is 0 for fewer than two values.
pub fn mean_ci(values: &[f64]) -> (f64, f64) {
    let t = values.len();
    if t == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / t as f64;
    if t < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1) as f64;
    (mean, Z95 * (var / t as f64).sqrt())
}

/// Success rate and its 95% CI half-width `z sqrt(p (1 - p) / t)`.
pub fn proportion_ci(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = successes as f64 / trials as f64;
    (p, Z95 * (p * (1.0 - p) / trials as f64).sqrt())
}

/// Slack used when comparing an observed success rate to `1 - delta`:
/// three binomial standard deviations at `p = 1 - delta`.
pub fn binomial_slack(delta: f64, trials: usize) -> f64 {
    3.0 * (delta * (1.0 - delta) / trials as f64).sqrt()
}
