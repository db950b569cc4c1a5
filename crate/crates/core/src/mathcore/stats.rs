//! Small-sample statistics used by diagnostics and tests.

/// Kolmogorov–Smirnov statistic of `samples` against `cdf`. Sorts in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    let n = samples.len();
    if n == 0 {
        return 0.0;
    }
    samples.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let c = cdf(x);
        d = d.max(c - i as f64 / nf).max((i + 1) as f64 / nf - c);
    }
    d
}

/// Asymptotic one-sample KS critical value at significance `alpha`, with
/// the Stephens small-sample correction.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    let sn = (n as f64).sqrt();
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c / (sn + 0.12 + 0.11 / sn)
}

/// Sample mean and its standard error.
pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (mean, (sample_variance(xs) / n).sqrt())
}

/// Unbiased sample variance (divides by `n - 1`).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    // Welford's update: exact zero for constant input, stable for large means.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    m2 / (n - 1) as f64
}
