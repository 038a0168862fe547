//! Autocorrelation, IACT / ESS, and log-kernel trace checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound on the IACT estimate; keeps the ESS finite.
pub const TAU_FLOOR: f64 = 1e-3;

/// Default ACF horizon, `min(T - 1, 10 sqrt(T))`.
pub fn default_max_lag(n: usize) -> usize {
    (n.saturating_sub(1)).min((10.0 * (n as f64).sqrt()) as usize)
}

/// Biased sample autocorrelations `ρ_0 .. ρ_max_lag`, normalized by the
/// lag-0 autocovariance.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 4 {
        return Err(Error::DegenerateSeries(format!("need at least 4 values, got {n}")));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSeries("series contains non-finite values".into()));
    }
    let max_lag = max_lag.min(n - 1);
    let mean = series.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let c0 = dev.iter().map(|d| d * d).sum::<f64>();
    if !(c0 > 0.0) {
        return Err(Error::DegenerateSeries("series is constant".into()));
    }
    let mut rho = Vec::with_capacity(max_lag + 1);
    rho.push(1.0);
    for k in 1..=max_lag {
        let ck: f64 = dev[..n - k].iter().zip(&dev[k..]).map(|(a, b)| a * b).sum();
        rho.push(ck / c0);
    }
    Ok(rho)
}

/// Integrated autocorrelation time from Geyer's initial monotone sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Iact {
    pub tau: f64,
    /// Number of pair sums `Γ_m` kept before truncation.
    pub pairs: usize,
    /// The raw estimate fell below [`TAU_FLOOR`].
    pub floored: bool,
}

/// `Γ_m = ρ_{2m} + ρ_{2m+1}`, truncated before the first `Γ_m <= 0`, made
/// non-increasing, and `τ = -1 + 2 Σ Γ_m` (floored at `1e-3`).
pub fn iact_geyer(rho: &[f64]) -> Result<Iact> {
    if rho.is_empty() {
        return Err(Error::DegenerateSeries("empty autocorrelation vector".into()));
    }
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut pairs = 0;
    for m in 0.. {
        let i = 2 * m;
        if i >= rho.len() {
            break;
        }
        let gamma = rho[i] + rho.get(i + 1).copied().unwrap_or(0.0);
        if gamma <= 0.0 {
            break;
        }
        let gamma = gamma.min(prev);
        sum += gamma;
        prev = gamma;
        pairs += 1;
    }
    let raw = -1.0 + 2.0 * sum;
    Ok(Iact {
        tau: raw.max(TAU_FLOOR),
        pairs,
        floored: raw < TAU_FLOOR,
    })
}

/// `T / τ` with the default lag horizon.
pub fn ess(series: &[f64]) -> Result<f64> {
    let rho = acf(series, default_max_lag(series.len()))?;
    Ok(series.len() as f64 / iact_geyer(&rho)?.tau)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssReport {
    pub n_retained: usize,
    pub max_lag: usize,
    pub per_dim_tau: Vec<f64>,
    pub per_dim_ess: Vec<f64>,
    pub min_ess: f64,
    pub per_dim_ess_per_second: Vec<f64>,
    /// `min_ess / wall_time_seconds`.
    pub ess_per_second: f64,
    pub wall_time_seconds: f64,
    /// Dimensions whose τ hit the floor.
    pub tau_floored: Vec<bool>,
    /// Dimensions whose samples never changed; reported as τ = T (ESS 1).
    pub degenerate: Vec<bool>,
    pub acf: Vec<Vec<f64>>,
}

/// Per-dimension diagnostics of an `N x m` sample matrix.
pub fn ess_report(samples: &[Vec<f64>], wall_time_seconds: f64) -> Result<EssReport> {
    let n = samples.len();
    let m = samples.first().map_or(0, Vec::len);
    if n < 4 || m == 0 {
        return Err(Error::DegenerateSeries(format!("need at least 4 rows and 1 column, got {n} x {m}")));
    }
    let max_lag = default_max_lag(n);
    let mut report = EssReport {
        n_retained: n,
        max_lag,
        per_dim_tau: Vec::with_capacity(m),
        per_dim_ess: Vec::with_capacity(m),
        min_ess: f64::INFINITY,
        per_dim_ess_per_second: Vec::with_capacity(m),
        ess_per_second: 0.0,
        wall_time_seconds,
        tau_floored: Vec::with_capacity(m),
        degenerate: Vec::with_capacity(m),
        acf: Vec::with_capacity(m),
    };
    for j in 0..m {
        let col: Vec<f64> = samples.iter().map(|r| r[j]).collect();
        let (tau, floored, degenerate, rho) = match acf(&col, max_lag) {
            Ok(rho) => {
                let iact = iact_geyer(&rho)?;
                (iact.tau, iact.floored, false, rho)
            }
            Err(Error::DegenerateSeries(_)) if col.iter().all(|v| v.is_finite()) => (n as f64, false, true, Vec::new()),
            Err(e) => return Err(e),
        };
        let e = n as f64 / tau;
        report.per_dim_tau.push(tau);
        report.per_dim_ess.push(e);
        report.per_dim_ess_per_second.push(per_second(e, wall_time_seconds));
        report.tau_floored.push(floored);
        report.degenerate.push(degenerate);
        report.acf.push(rho);
        report.min_ess = report.min_ess.min(e);
    }
    report.ess_per_second = per_second(report.min_ess, wall_time_seconds);
    Ok(report)
}

fn per_second(ess: f64, secs: f64) -> f64 {
    if secs > 0.0 {
        ess / secs
    } else {
        0.0
    }
}

/// `mean(x_1..x_t)` for every `t`.
pub fn running_mean(series: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    series
        .iter()
        .enumerate()
        .map(|(i, v)| {
            acc += v;
            acc / (i + 1) as f64
        })
        .collect()
}

/// Kolmogorov distribution tail `P(K > λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        // the alternating series converges slowly here; 1 - sf < 1e-9
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as i64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov–Smirnov test against a continuous `cdf`.
/// The p-value uses the asymptotic law with Stephens' small-sample correction.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<KsResult> {
    let n = sample.len();
    if n == 0 {
        return Err(Error::DegenerateSeries("empty sample".into()));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
        })
        .fold(0.0, f64::max);
    let en = nf.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf((en + 0.12 + 0.11 / en) * d),
    })
}

/// Two-sample Kolmogorov–Smirnov test (asymptotic p-value).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::DegenerateSeries("empty sample".into()));
    }
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf((en + 0.12 + 0.11 / en) * d),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaritySummary {
    pub burn_in: usize,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub first_half_mean: f64,
    pub second_half_mean: f64,
    /// Running mean of the post-burn-in trace.
    pub running_mean: Vec<f64>,
}

/// Split-half comparison of the post-burn-in log-kernel trace.
pub fn logk_stationarity(trace: &[f64], burn_in: usize) -> Result<StationaritySummary> {
    let t = trace.len();
    if t <= 2 * burn_in || t < burn_in + 4 {
        return Err(Error::DegenerateSeries(format!(
            "trace of length {t} is too short for burn-in {burn_in}"
        )));
    }
    let post = &trace[burn_in..];
    if post.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSeries("trace contains non-finite values".into()));
    }
    let (first, second) = post.split_at(post.len() / 2);
    let ks = ks_two_sample(first, second)?;
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    Ok(StationaritySummary {
        burn_in,
        ks_statistic: ks.statistic,
        p_value: ks.p_value,
        first_half_mean: mean(first),
        second_half_mean: mean(second),
        running_mean: running_mean(post),
    })
}
