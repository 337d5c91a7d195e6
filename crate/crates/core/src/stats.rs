//! Small statistics toolkit: one-sample Kolmogorov–Smirnov, Wilson score
//! intervals, medians with order-statistic confidence bounds.

use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal};

/// Two-sided standard normal quantile for confidence `level`.
pub fn normal_quantile(level: f64) -> f64 {
    let n = Normal::standard();
    n.inverse_cdf(0.5 + level / 2.0)
}

/// Sup-distance between the empirical CDF of `sorted` and `cdf`.
///
/// `sorted` must be ascending.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Asymptotic Kolmogorov survival `P(sqrt(n) D_n > t)`.
pub fn kolmogorov_survival(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * t * t).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// p-value of a one-sample KS statistic `d` from `n` draws.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    // Stephens' small-sample correction
    kolmogorov_survival(d * (sn + 0.12 + 0.11 / sn))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn intersects(&self, lower: f64, upper: f64) -> bool {
        self.lower <= upper && lower <= self.upper
    }

    pub fn scale(&self, k: f64) -> Interval {
        Interval {
            lower: self.lower * k,
            upper: self.upper * k,
        }
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> Interval {
    if trials == 0 {
        return Interval { lower: 0.0, upper: 1.0 };
    }
    let z = normal_quantile(level);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Interval {
        lower: if successes == 0 { 0.0 } else { (centre - half).max(0.0) },
        upper: if successes == trials { 1.0 } else { (centre + half).min(1.0) },
    }
}

pub fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Distribution-free interval for the median from order statistics.
///
/// Uses the largest symmetric pair `(x_(k), x_(n+1-k))` whose binomial
/// coverage is at least `level`; falls back to the sample range.
pub fn median_interval(sorted: &[f64], level: f64) -> Interval {
    let n = sorted.len();
    if n == 0 {
        return Interval {
            lower: f64::NAN,
            upper: f64::NAN,
        };
    }
    let bin = Binomial::new(0.5, n as u64).expect("valid binomial");
    let mut best = (0, n - 1);
    // coverage of [x_(k), x_(n+1-k)] (1-based) is 1 - 2 P(B <= k-1)
    for k in 1..=n.div_ceil(2) {
        let coverage = 1.0 - 2.0 * bin.cdf(k as u64 - 1);
        if coverage >= level {
            best = (k - 1, n - k);
        } else {
            break;
        }
    }
    Interval {
        lower: sorted[best.0],
        upper: sorted[best.1],
    }
}

pub fn sort_floats(v: &mut [f64]) {
    v.sort_by(|a, b| a.total_cmp(b));
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson correlation; NaN when either side is constant.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let ma = mean(a);
    let mb = mean(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_quantile_99() {
        assert!((normal_quantile(0.99) - 2.5758293035489).abs() < 1e-9);
    }

    #[test]
    fn ks_uniform_grid_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x);
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
        assert!(ks_p_value(d, n) > 0.99);
    }

    #[test]
    fn kolmogorov_critical_value() {
        // classic 1% critical value 1.6276
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 1e-4);
    }

    #[test]
    fn wilson_known_values() {
        // 0 of 10 at 95%: upper ~ 0.2775
        let w = wilson_interval(0, 10, 0.95);
        assert_eq!(w.lower, 0.0);
        assert!((w.upper - 0.27753).abs() < 1e-4);
        let w = wilson_interval(50, 100, 0.95);
        assert!((w.lower - 0.40383).abs() < 1e-4 && (w.upper - 0.59617).abs() < 1e-4);
    }

    #[test]
    fn median_interval_brackets_median() {
        let xs: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(median(&xs), 49.5);
        let ci = median_interval(&xs, 0.99);
        assert!(ci.lower < 49.5 && ci.upper > 49.5);
        // 99% order-statistic bounds for n = 100 are x_(37), x_(64)
        assert_eq!((ci.lower, ci.upper), (36.0, 63.0));
        let tiny = median_interval(&[1.0, 2.0], 0.99);
        assert_eq!((tiny.lower, tiny.upper), (1.0, 2.0));
    }
}
