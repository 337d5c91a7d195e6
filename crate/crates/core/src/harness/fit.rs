//! Least-squares fits of mean active-link counts against `n`.
//!
//! The model is `mean(eta_n) = c1 + scale * n^exponent`. With the exponent
//! pinned it is linear in `(c1, scale)`; otherwise Levenberg–Marquardt runs
//! from several starting exponents and the lowest residual wins.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::sweep::ExperimentRecord;

pub const EXPONENT_STARTS: [f64; 3] = [0.1, 0.25, 0.4];
const MIN_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub c1: f64,
    pub scale: f64,
    pub exponent: f64,
    pub fixed_exponent: Option<f64>,
    pub residual_rms: f64,
    pub n_range: (f64, f64),
    pub points: usize,
}

impl ScalingFit {
    pub fn predict(&self, n: f64) -> f64 {
        self.c1 + self.scale * n.powf(self.exponent)
    }
}

/// `(n, mean eta_n)` per distinct `n`, ascending.
pub fn mean_counts(records: &[ExperimentRecord]) -> Vec<(f64, f64)> {
    let mut acc: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for r in records {
        // n > 0, so bit patterns order like the values
        let e = acc.entry(r.n.to_bits()).or_insert((r.n, 0.0, 0));
        e.1 += r.eta_n as f64;
        e.2 += 1;
    }
    acc.into_values().map(|(n, s, c)| (n, s / c as f64)).collect()
}

/// Ordinary least squares `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub residual_rms: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return Err(Error::Fit("need at least two points".into()));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("regressor is constant".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(LinearFit {
        intercept,
        slope,
        residual_rms: (rss / n).sqrt(),
    })
}

fn rss(ns: &[f64], ys: &[f64], theta: &Vector3<f64>) -> f64 {
    ns.iter()
        .zip(ys)
        .map(|(n, y)| (y - theta[0] - theta[1] * n.powf(theta[2])).powi(2))
        .sum()
}

/// Levenberg–Marquardt on `(c1, scale, exponent)`.
fn levenberg_marquardt(ns: &[f64], ys: &[f64], start: Vector3<f64>) -> (Vector3<f64>, f64) {
    let mut theta = start;
    let mut cost = rss(ns, ys, &theta);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (n, y) in ns.iter().zip(ys) {
            let p = n.powf(theta[2]);
            let r = y - theta[0] - theta[1] * p;
            let j = Vector3::new(1.0, p, theta[1] * p * n.ln());
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj;
            for d in 0..3 {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let cand = theta + step;
            let c = rss(ns, ys, &cand);
            if c.is_finite() && c <= cost {
                let done = (cost - c) <= 1e-15 * cost.max(1e-300) || step.norm() <= 1e-14 * (1.0 + theta.norm());
                theta = cand;
                cost = c;
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                if done {
                    return (theta, cost);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (theta, cost)
}

/// Fits mean counts per `n`. With `fix_exponent` only `c1` and `scale` are estimated.
pub fn fit_points(points: &[(f64, f64)], fix_exponent: Option<f64>) -> Result<ScalingFit> {
    if points.len() < MIN_POINTS {
        return Err(Error::Fit(format!(
            "need at least {MIN_POINTS} distinct n values, got {}",
            points.len()
        )));
    }
    let ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    if ns.iter().any(|n| !(*n > 0.0)) {
        return Err(Error::Fit("intensities must be positive".into()));
    }
    let spread = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(spread > 0.0) {
        return Err(Error::Fit("counts are constant; the scaling model is not identifiable".into()));
    }
    let n_range = (ns[0], *ns.last().expect("nonempty"));
    let m = ns.len() as f64;

    let profile = |b: f64| -> Result<LinearFit> {
        let xs: Vec<f64> = ns.iter().map(|n| n.powf(b)).collect();
        linear_fit(&xs, &ys)
    };

    if let Some(b) = fix_exponent {
        let lin = profile(b)?;
        return Ok(ScalingFit {
            c1: lin.intercept,
            scale: lin.slope,
            exponent: b,
            fixed_exponent: Some(b),
            residual_rms: lin.residual_rms,
            n_range,
            points: points.len(),
        });
    }

    let mut best: Option<(Vector3<f64>, f64)> = None;
    for b0 in EXPONENT_STARTS {
        let lin = profile(b0)?;
        let (theta, cost) = levenberg_marquardt(&ns, &ys, Vector3::new(lin.intercept, lin.slope, b0));
        if cost.is_finite() && best.as_ref().is_none_or(|(_, c)| cost < *c) {
            best = Some((theta, cost));
        }
    }
    let (theta, cost) = best.ok_or_else(|| Error::Fit("no start converged".into()))?;
    Ok(ScalingFit {
        c1: theta[0],
        scale: theta[1],
        exponent: theta[2],
        fixed_exponent: None,
        residual_rms: (cost / m).sqrt(),
        n_range,
        points: points.len(),
    })
}

pub fn fit_scaling(records: &[ExperimentRecord], fix_exponent: Option<f64>) -> Result<ScalingFit> {
    fit_points(&mean_counts(records), fix_exponent)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(c: f64, b: f64) -> Vec<(f64, f64)> {
        (1..=10).map(|k| 100.0 * k as f64).map(|n| (n, c + n.powf(b))).collect()
    }

    #[test]
    fn noiseless_free_fit_recovers_parameters() {
        let fit = fit_points(&synth(192.0, 0.25), None).unwrap();
        assert!((fit.c1 - 192.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.exponent - 0.25).abs() < 1e-6);
        assert!((fit.scale - 1.0).abs() < 1e-6);
    }

    #[test]
    fn noiseless_fixed_fit() {
        let fit = fit_points(&synth(145.0, 0.25), Some(0.25)).unwrap();
        assert!((fit.c1 - 145.0).abs() < 1e-9);
        assert_eq!(fit.exponent, 0.25);
        assert_eq!(fit.fixed_exponent, Some(0.25));
        assert!(fit.residual_rms < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        let flat: Vec<(f64, f64)> = (1..=5).map(|k| (k as f64 * 10.0, 7.0)).collect();
        assert!(matches!(fit_points(&flat, None), Err(Error::Fit(_))));
        assert!(matches!(fit_points(&synth(1.0, 0.3)[..3], None), Err(Error::Fit(_))));
    }

    #[test]
    fn linear_fit_exact_line() {
        let l = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]).unwrap();
        assert!((l.intercept - 1.0).abs() < 1e-12 && (l.slope - 2.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }
}
