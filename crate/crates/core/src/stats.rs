//! Sample statistics used across modules.

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
pub fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Linear interpolation between order statistics (Hyndman-Fan type 7).
/// `sorted` must be ascending and non-empty.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Adjusted Fisher-Pearson skewness `G1`. Zero for constant samples;
/// requires at least three values to be defined, returns 0 otherwise.
pub fn skewness(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 3 {
        return 0.0;
    }
    let m = mean(values);
    let m2 = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    if m2 <= 0.0 {
        return 0.0;
    }
    let m3 = values.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    let g1 = m3 / m2.powf(1.5);
    g1 * (n * (n - 1.0)).sqrt() / (n - 2.0)
}

/// Two-pass Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quartiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 10.0];
        assert_eq!(quantile_type7(&v, 0.25), 2.0);
        assert_eq!(quantile_type7(&v, 0.5), 3.0);
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_type7(&v, 0.25), 1.75);
        assert_eq!(quantile_type7(&v, 0.75), 3.25);
    }

    #[test]
    fn skewness_signs() {
        assert_eq!(skewness(&[2.0; 10]), 0.0);
        assert!(skewness(&[1.0, 1.0, 1.0, 1.0, 10.0]) > 1.0);
        assert!(skewness(&[1.0, 10.0, 10.0, 10.0, 10.0]) < -1.0);
        // Symmetric sample.
        assert!(skewness(&[1.0, 2.0, 3.0, 4.0, 5.0]).abs() < 1e-15);
    }

    #[test]
    fn skewness_known_value() {
        // scipy.stats.skew([1, 2, 3, 10], bias=False)
        let v = [1.0, 2.0, 3.0, 10.0];
        let n = 4.0_f64;
        let m2 = (9.0 + 4.0 + 1.0 + 36.0) / n;
        let m3 = (-27.0 - 8.0 - 1.0 + 216.0) / n;
        let expected = m3 / f64::powf(m2, 1.5) * (n * (n - 1.0)).sqrt() / (n - 2.0);
        assert!((skewness(&v) - expected).abs() < 1e-14);
        assert!((skewness(&v) - 1.763632614803888).abs() < 1e-12);
    }
}
