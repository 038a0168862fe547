//! Posterior summaries of retained draws: means, equal-tail intervals, and a
//! mode estimate.
//!
//! The best retained draw is a noisy mode estimate in more than a couple of
//! dimensions (the chance that any draw lands near the mode shrinks
//! geometrically with dimension), so it is refined by coordinate-wise
//! maximization of `log K` before being reported. Both values are kept.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::LogKernel;
use crate::numerics::minimize_bounded;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSummary {
    pub name: String,
    pub mode: f64,
    pub best_draw: f64,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q975: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub n_draws: usize,
    pub mode_log_k: f64,
    pub best_draw_log_k: f64,
    pub coefficients: Vec<CoefficientSummary>,
}

impl PosteriorSummary {
    pub fn mode(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.mode).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.mean).collect()
    }
}

/// Linearly interpolated sample quantile (type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Coordinate-wise ascent on `log K` from `start`: each coordinate is
/// maximized by Brent's method over a window around its current value, and
/// sweeps repeat until `log K` stops improving.
pub fn refine_mode(kernel: &LogKernel, start: &[f64], windows: &[f64]) -> Result<(Vec<f64>, f64)> {
    kernel.check_point(start)?;
    let mut x = start.to_vec();
    let mut best = kernel.log_eval(&x);
    if !best.is_finite() {
        return Err(Error::InvalidState("mode refinement started outside the support".into()));
    }
    for _ in 0..500 {
        let before = best;
        for k in 0..x.len() {
            let w = windows.get(k).copied().unwrap_or(1.0).max(1e-6);
            let c = x[k];
            let trial = std::cell::RefCell::new(x.clone());
            let (z, neg) = minimize_bounded(
                |z| {
                    let mut t = trial.borrow_mut();
                    t[k] = z;
                    -kernel.log_eval(&t)
                },
                c - w,
                c + w,
                1e-12,
            );
            if -neg > best {
                best = -neg;
                x[k] = z;
            }
        }
        if best - before <= 1e-13 * best.abs().max(1.0) {
            break;
        }
    }
    Ok((x, best))
}

/// Summaries of `draws` (rows) under `kernel`.
pub fn posterior_summary(kernel: &LogKernel, draws: &[Vec<f64>], names: &[String]) -> Result<PosteriorSummary> {
    let n = draws.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 draws".into()));
    }
    let m = kernel.dim();
    if names.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: names.len(),
        });
    }
    let (best_idx, best_log_k) = draws
        .iter()
        .map(|d| kernel.log_eval(d))
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let best = &draws[best_idx];

    let mut stats = Vec::with_capacity(m);
    for j in 0..m {
        let mut col: Vec<f64> = draws.iter().map(|d| d[j]).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        col.sort_by(f64::total_cmp);
        stats.push((mean, sd, quantile_sorted(&col, 0.025), quantile_sorted(&col, 0.975)));
    }
    let windows: Vec<f64> = stats.iter().map(|s| 4.0 * s.1).collect();
    let (mode, mode_log_k) = refine_mode(kernel, best, &windows)?;

    Ok(PosteriorSummary {
        n_draws: n,
        mode_log_k,
        best_draw_log_k: best_log_k,
        coefficients: (0..m)
            .map(|j| CoefficientSummary {
                name: names[j].clone(),
                mode: mode[j],
                best_draw: best[j],
                mean: stats[j].0,
                sd: stats[j].1,
                q025: stats[j].2,
                q975: stats[j].3,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&v, 0.5), 3.0);
        assert_eq!(quantile_sorted(&v, 0.025), 1.1);
        assert!((quantile_sorted(&v, 0.975) - 4.9).abs() < 1e-12);
    }

    #[test]
    fn refinement_reaches_the_kinked_maximum() {
        // maximum of -(x-1)^2 - 3|y| - (y-0.2)^2 at (1, 0)
        let k = LogKernel::from_fn("kink", 2, |x| -(x[0] - 1.0).powi(2) - 3.0 * x[1].abs() - (x[1] - 0.2).powi(2));
        let (x, v) = refine_mode(&k, &[0.3, 0.7], &[2.0, 2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-6 && x[1].abs() < 1e-6, "{x:?}");
        assert!((v + 0.04).abs() < 1e-9);
    }

    #[test]
    fn summary_shapes() {
        let k = LogKernel::from_fn("g", 1, |x| -0.5 * x[0] * x[0]);
        let draws: Vec<Vec<f64>> = (0..101).map(|i| vec![(i as f64 - 50.0) / 25.0]).collect();
        let s = posterior_summary(&k, &draws, &["b".to_string()]).unwrap();
        let c = &s.coefficients[0];
        assert_eq!(c.best_draw, 0.0);
        assert!(c.mode.abs() < 1e-6 && c.mean.abs() < 1e-12);
        assert!((c.q025 + 1.9).abs() < 1e-12);
        assert!(posterior_summary(&k, &draws, &[]).is_err());
    }
}
