//! Monte Carlo checks of the limit theorems behind the scaling law.
//!
//! Each checker is a pure function of its parameters and seed. Replications
//! draw from streams derived from `(seed, grid point, replication)`, and
//! results are aggregated from fully collected vectors, so the outcome does
//! not depend on how rayon schedules the work.
//!
//! Verdicts never rest on a point estimate: medians carry order-statistic
//! intervals and probabilities carry Wilson intervals, all at 99%.

use std::io::Write;

use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{draw_interference_gain, tail_probability_unchecked};
use crate::error::{Error, Result};
use crate::params::check_alpha;
use crate::rng::{self, Stream};
use crate::stats::{self, Interval};

/// Confidence level of every interval a verdict is based on.
pub const CONFIDENCE: f64 = 0.99;
/// Largest-size median must fall below this fraction of the smallest-size median.
pub const SLLN_DECREASE_FACTOR: f64 = 0.1;
/// `P(S_m > x) / (m P(X > x))` must be compatible with `[BAND_LOW, 1 / BAND_LOW]`.
pub const BIG_JUMP_BAND_LOW: f64 = 0.8;
/// Largest `m * P(X > x)` accepted as "in the tail".
pub const BIG_JUMP_MAX_MASS: f64 = 0.05;

const CHUNK: u64 = 8192;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTestReport {
    pub test_name: String,
    pub sample_sizes: Vec<u64>,
    pub statistic_per_size: Vec<f64>,
    pub lower_per_size: Vec<f64>,
    pub upper_per_size: Vec<f64>,
    pub replications: u64,
    pub pass: bool,
    pub threshold_used: f64,
    pub seed: u64,
    /// Abscissae when the grid is not the sample size (big-jump `x` values).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_grid: Option<Vec<f64>>,
    /// Theoretical curve for comparison; never part of the verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<f64>>,
    /// `P(max X_i > x) / P(S_m > x)` at the largest `x`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_to_sum_ratio: Option<f64>,
}

impl LimitTestReport {
    fn abscissae(&self) -> Vec<f64> {
        match &self.x_grid {
            Some(x) => x.clone(),
            None => self.sample_sizes.iter().map(|&s| s as f64).collect(),
        }
    }

    /// CSV of `size,statistic,lower,upper` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "size,statistic,lower,upper")?;
        for (k, x) in self.abscissae().iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                x, self.statistic_per_size[k], self.lower_per_size[k], self.upper_per_size[k]
            )?;
        }
        Ok(())
    }
}

fn check_moment(p: f64, alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    if !(p > 0.0 && p < 2.0 / alpha) {
        return Err(Error::param(format!(
            "p = {p} violates 0 < p < 2/alpha = {}: X^p is not integrable",
            2.0 / alpha
        )));
    }
    Ok(())
}

fn check_sizes(sizes: &[u64], reps: u64) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::param("size grid is empty"));
    }
    if reps == 0 {
        return Err(Error::param("need at least one replication"));
    }
    Ok(())
}

/// How many summands a replication uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumIndex {
    /// Exactly `n` terms.
    Fixed,
    /// `N ~ Poisson(n)` terms, drawn independently of the summands.
    Poisson,
}

/// `N^(-1/p) S_N`, with the empty sum giving 0.
pub fn normalized_sum(count: u64, sum: f64, p: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        sum / (count as f64).powf(1.0 / p)
    }
}

/// SLLN check with an arbitrary summand sampler.
///
/// Pass rule: the 99% upper bound of the median at the largest size is at most
/// `SLLN_DECREASE_FACTOR` times the lower bound at the smallest size, and the
/// medians are nonincreasing apart from at most one inversion.
pub fn slln_check_with<F>(
    test_name: &str,
    p: f64,
    sizes: &[u64],
    reps: u64,
    seed: u64,
    index: SumIndex,
    sampler: F,
) -> Result<LimitTestReport>
where
    F: Fn(&mut Stream) -> f64 + Sync,
{
    check_sizes(sizes, reps)?;
    let mut stat = Vec::with_capacity(sizes.len());
    let mut lower = Vec::with_capacity(sizes.len());
    let mut upper = Vec::with_capacity(sizes.len());
    for (k, &n) in sizes.iter().enumerate() {
        let poisson = match index {
            SumIndex::Poisson if n > 0 => Some(Poisson::new(n as f64).map_err(|e| Error::param(e.to_string()))?),
            _ => None,
        };
        let mut values: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut s = rng::stream(rng::derive_seed2(seed, k as u64, r));
                let count = match (index, &poisson) {
                    (SumIndex::Fixed, _) => n,
                    (SumIndex::Poisson, Some(d)) => d.sample(&mut s) as u64,
                    (SumIndex::Poisson, None) => 0,
                };
                let sum: f64 = (0..count).map(|_| sampler(&mut s)).sum();
                normalized_sum(count, sum, p)
            })
            .collect();
        stats::sort_floats(&mut values);
        let ci = stats::median_interval(&values, CONFIDENCE);
        stat.push(stats::median(&values));
        lower.push(ci.lower);
        upper.push(ci.upper);
    }
    let inversions = stat.windows(2).filter(|w| w[1] > w[0]).count();
    let first_lower = lower[0];
    let last_upper = *upper.last().expect("nonempty");
    let pass = last_upper <= SLLN_DECREASE_FACTOR * first_lower && inversions <= 1;
    Ok(LimitTestReport {
        test_name: test_name.to_string(),
        sample_sizes: sizes.to_vec(),
        statistic_per_size: stat,
        lower_per_size: lower,
        upper_per_size: upper,
        replications: reps,
        pass,
        threshold_used: SLLN_DECREASE_FACTOR,
        seed,
        x_grid: None,
        reference: None,
        max_to_sum_ratio: None,
    })
}

/// Marcinkiewicz–Zygmund strong law for interference gains: `n^(-1/p) S_n -> 0`
/// for `p < 2/alpha`.
pub fn mz_slln_check(p: f64, alpha: f64, sizes: &[u64], reps: u64, seed: u64) -> Result<LimitTestReport> {
    check_moment(p, alpha)?;
    slln_check_with("mz_slln", p, sizes, reps, seed, SumIndex::Fixed, move |s| {
        draw_interference_gain(alpha, s)
    })
}

/// Same law with a Poisson(`n`) number of summands.
pub fn poisson_slln_check(p: f64, alpha: f64, mean_sizes: &[u64], reps: u64, seed: u64) -> Result<LimitTestReport> {
    check_moment(p, alpha)?;
    slln_check_with("poisson_slln", p, mean_sizes, reps, seed, SumIndex::Poisson, move |s| {
        draw_interference_gain(alpha, s)
    })
}

/// Smallest `x` with `m * P(X > x) <= mass`.
pub fn x_for_tail_mass(m: u64, alpha: f64, mass: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(mass > 0.0 && mass < m as f64) {
        return Err(Error::param(format!("tail mass {mass} out of range for m = {m}")));
    }
    let target = mass / m as f64;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while tail_probability_unchecked(hi, alpha) > target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tail_probability_unchecked(mid, alpha) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Single-big-jump check: `P(S_m > x) ~ m P(X > x)`.
///
/// For each `x` the ratio `P(S_m > x) / (m P(X > x))` is estimated with a 99%
/// Wilson interval; the check passes when every interval meets
/// `[0.8, 1.25]`.
pub fn big_jump_check(m: u64, alpha: f64, x_grid: &[f64], reps: u64, seed: u64) -> Result<LimitTestReport> {
    check_alpha(alpha)?;
    if m == 0 {
        return Err(Error::param("m must be at least 1"));
    }
    if x_grid.is_empty() || reps == 0 {
        return Err(Error::param("need a nonempty x grid and at least one replication"));
    }
    let mut tails = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let mass = m as f64 * tail_probability_unchecked(x.max(0.0), alpha);
        if !(x > 0.0) || mass > BIG_JUMP_MAX_MASS {
            let x_min = x_for_tail_mass(m, alpha, BIG_JUMP_MAX_MASS)?;
            return Err(Error::param(format!(
                "x = {x} is not in the tail (m * P(X > x) = {mass:.4} > {BIG_JUMP_MAX_MASS}); use x >= {x_min:.6e}"
            )));
        }
        tails.push(mass / m as f64);
    }
    let k = x_grid.len();
    let chunks = reps.div_ceil(CHUNK);
    let (sum_hits, max_hits) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = rng::stream(rng::derive_seed2(seed, 0xB16, c));
            let mut sum_hits = vec![0u64; k];
            let mut max_hits = vec![0u64; k];
            let todo = CHUNK.min(reps - c * CHUNK);
            for _ in 0..todo {
                let mut total = 0.0;
                let mut largest: f64 = 0.0;
                for _ in 0..m {
                    let g = draw_interference_gain(alpha, &mut s);
                    total += g;
                    largest = largest.max(g);
                }
                for (i, &x) in x_grid.iter().enumerate() {
                    sum_hits[i] += u64::from(total > x);
                    max_hits[i] += u64::from(largest > x);
                }
            }
            (sum_hits, max_hits)
        })
        .reduce(
            || (vec![0u64; k], vec![0u64; k]),
            |(mut a, mut b), (c, d)| {
                for i in 0..k {
                    a[i] += c[i];
                    b[i] += d[i];
                }
                (a, b)
            },
        );

    let mut stat = Vec::with_capacity(k);
    let mut lower = Vec::with_capacity(k);
    let mut upper = Vec::with_capacity(k);
    let mut pass = true;
    for i in 0..k {
        let scale = 1.0 / (m as f64 * tails[i]);
        let ci: Interval = stats::wilson_interval(sum_hits[i], reps, CONFIDENCE).scale(scale);
        stat.push(sum_hits[i] as f64 / reps as f64 * scale);
        pass &= ci.intersects(BIG_JUMP_BAND_LOW, 1.0 / BIG_JUMP_BAND_LOW);
        lower.push(ci.lower);
        upper.push(ci.upper);
    }
    let last = largest_index(x_grid);
    let max_to_sum_ratio = if sum_hits[last] > 0 {
        max_hits[last] as f64 / sum_hits[last] as f64
    } else {
        f64::NAN
    };
    Ok(LimitTestReport {
        test_name: "big_jump".into(),
        sample_sizes: vec![m; k],
        statistic_per_size: stat,
        lower_per_size: lower,
        upper_per_size: upper,
        replications: reps,
        pass,
        threshold_used: BIG_JUMP_BAND_LOW,
        seed,
        x_grid: Some(x_grid.to_vec()),
        reference: None,
        max_to_sum_ratio: Some(max_to_sum_ratio),
    })
}

fn largest_index(xs: &[f64]) -> usize {
    xs.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Parameters of the interference-concentration event
/// `m^(-1/p) sum_{j<=m} h_j 1[h_jj > h0] <= eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilitySchedule {
    pub delta: f64,
    pub gamma_exp: f64,
    pub p: f64,
    pub alpha: f64,
    /// Minimum rate in nats per channel use (`R_min / B`).
    pub r_min_nats: f64,
}

impl FeasibilitySchedule {
    pub fn validate(&self) -> Result<()> {
        check_moment(self.p, self.alpha)?;
        if !(self.delta > 0.0 && self.delta < self.gamma_exp && self.gamma_exp < 0.5) {
            return Err(Error::param(format!(
                "need 0 < delta < gamma < 1/2, got delta = {}, gamma = {}",
                self.delta, self.gamma_exp
            )));
        }
        if !(self.r_min_nats > 0.0 && self.r_min_nats.is_finite()) {
            return Err(Error::param("r_min_nats must be positive"));
        }
        Ok(())
    }

    /// `ceil(n^delta)`, ignoring rounding noise when `n^delta` is an integer.
    pub fn set_size(&self, n: f64) -> u64 {
        let v = n.powf(self.delta);
        let r = v.round();
        if (v - r).abs() <= 1e-9 * r.max(1.0) {
            r as u64
        } else {
            v.ceil() as u64
        }
    }

    /// `gamma exp(-R_min) n^(-delta/p) ln n`.
    pub fn epsilon(&self, n: f64) -> f64 {
        self.gamma_exp * (-self.r_min_nats).exp() * n.powf(-self.delta / self.p) * n.ln()
    }

    pub fn h0(&self, n: f64) -> f64 {
        self.gamma_exp * n.ln()
    }

    /// `n^-gamma (ln n)^(-2/alpha)`, the decay rate of the union bound.
    pub fn reference_rate(&self, n: f64) -> f64 {
        n.powf(-self.gamma_exp) * n.ln().powf(-2.0 / self.alpha)
    }
}

/// Probability that `m^(-1/p) sum_{j<=m} h_j 1[d_j > h0] > eps`, with `h_j`
/// interference gains and `d_j ~ Exp(1)` direct gains.
pub fn violation_probability(
    m: u64,
    eps: f64,
    h0: f64,
    p: f64,
    alpha: f64,
    reps: u64,
    seed: u64,
) -> (u64, Interval) {
    let chunks = reps.div_ceil(CHUNK);
    let limit = eps * (m as f64).powf(1.0 / p);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = rng::stream(rng::derive_seed2(seed, 0xFEA5, c));
            let todo = CHUNK.min(reps - c * CHUNK);
            let mut hits = 0u64;
            for _ in 0..todo {
                let mut total = 0.0;
                for _ in 0..m {
                    let direct: f64 = Exp1.sample(&mut s);
                    if direct > h0 {
                        total += draw_interference_gain(alpha, &mut s);
                    }
                }
                hits += u64::from(m > 0 && total > limit);
            }
            hits
        })
        .sum();
    (hits, stats::wilson_interval(hits, reps, CONFIDENCE))
}

/// Decay of `P(U^c)` along `n_grid` for `m = ceil(n^delta)`.
///
/// Passes when the 99% Wilson intervals are strictly ordered (each upper bound
/// below the previous lower bound) across the top half of the grid.
pub fn feasibility_event_decay(
    schedule: &FeasibilitySchedule,
    n_grid: &[f64],
    reps: u64,
    seed: u64,
) -> Result<LimitTestReport> {
    schedule.validate()?;
    if n_grid.len() < 2 || reps == 0 {
        return Err(Error::param("need at least two grid points and one replication"));
    }
    if n_grid.iter().any(|&n| !(n > 1.0)) || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("n grid must be ascending with every n > 1"));
    }
    let mut stat = Vec::new();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut sizes = Vec::new();
    for (k, &n) in n_grid.iter().enumerate() {
        let m = schedule.set_size(n);
        let (hits, ci) = violation_probability(
            m,
            schedule.epsilon(n),
            schedule.h0(n),
            schedule.p,
            schedule.alpha,
            reps,
            rng::derive_seed(seed, k as u64),
        );
        sizes.push(m);
        stat.push(hits as f64 / reps as f64);
        lower.push(ci.lower);
        upper.push(ci.upper);
    }
    let start = n_grid.len() / 2;
    let pass = (start..n_grid.len() - 1).all(|k| upper[k + 1] < lower[k]);
    Ok(LimitTestReport {
        test_name: "feasibility_event_decay".into(),
        sample_sizes: sizes,
        statistic_per_size: stat,
        lower_per_size: lower,
        upper_per_size: upper,
        replications: reps,
        pass,
        threshold_used: CONFIDENCE,
        seed,
        x_grid: Some(n_grid.to_vec()),
        reference: Some(n_grid.iter().map(|&n| schedule.reference_rate(n)).collect()),
        max_to_sum_ratio: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_gate() {
        assert!(mz_slln_check(0.9, 3.0, &[10], 5, 1).is_err());
        assert!(mz_slln_check(2.0 / 3.0, 3.0, &[10], 5, 1).is_err());
        assert!(poisson_slln_check(0.0, 3.0, &[10], 5, 1).is_err());
        assert!(mz_slln_check(0.5, 3.0, &[], 5, 1).is_err());
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(normalized_sum(0, 0.0, 0.5), 0.0);
        assert_eq!(normalized_sum(4, 8.0, 0.5), 0.5);
    }

    #[test]
    fn all_zero_summands_pass() {
        let r = slln_check_with("zeros", 0.5, &[10, 100, 1000], 20, 3, SumIndex::Fixed, |_| 0.0).unwrap();
        assert!(r.statistic_per_size.iter().all(|s| *s == 0.0));
        assert!(r.pass);
    }

    #[test]
    fn big_jump_rejects_small_x() {
        let err = big_jump_check(50, 3.0, &[10.0], 100, 1).unwrap_err();
        assert!(err.to_string().contains("use x >="));
    }

    #[test]
    fn x_for_mass_hits_target() {
        let x = x_for_tail_mass(50, 3.0, 0.01).unwrap();
        let mass = 50.0 * tail_probability_unchecked(x, 3.0);
        assert!((mass - 0.01).abs() < 1e-9);
    }

    #[test]
    fn schedule_validation_and_sizes() {
        let s = FeasibilitySchedule {
            delta: 0.2,
            gamma_exp: 0.4,
            p: 0.6,
            alpha: 3.0,
            r_min_nats: 1.0,
        };
        s.validate().unwrap();
        assert_eq!(s.set_size(1e5), 10);
        assert_eq!(s.set_size(1e3), 4);
        assert!(FeasibilitySchedule { delta: 0.5, ..s }.validate().is_err());
        assert!(FeasibilitySchedule { p: 0.7, ..s }.validate().is_err());
        assert!(FeasibilitySchedule { gamma_exp: 0.6, delta: 0.55, ..s }.validate().is_err());
    }

    #[test]
    fn empty_event_sum_never_violates() {
        let (hits, _) = violation_probability(0, 0.0, 0.0, 0.5, 3.0, 1000, 1);
        assert_eq!(hits, 0);
    }

    #[test]
    fn report_csv_shape() {
        let r = slln_check_with("zeros", 0.5, &[10, 20], 3, 3, SumIndex::Fixed, |_| 0.0).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("size,statistic,lower,upper"));
        assert_eq!(text.lines().count(), 3);
    }
}
