//! Random-walk Metropolis–Hastings, for comparison.

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::asg::{default_x0, ChainConfig, ChainOutput, SamplerKind};
use crate::error::{Error, Result};
use crate::kernels::LogKernel;
use crate::rng::chain_rng;

pub const DEFAULT_PROPOSAL_SD: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RwmhConfig {
    #[serde(flatten)]
    pub chain: ChainConfig,
    /// Per-coordinate proposal standard deviations; a single value is
    /// broadcast to every coordinate.
    pub proposal_sd: Vec<f64>,
}

impl Default for RwmhConfig {
    fn default() -> Self {
        Self {
            chain: ChainConfig::default(),
            proposal_sd: vec![DEFAULT_PROPOSAL_SD],
        }
    }
}

impl RwmhConfig {
    pub fn new(chain: ChainConfig, proposal_sd: f64) -> Self {
        Self {
            chain,
            proposal_sd: vec![proposal_sd],
        }
    }

    fn scales(&self, dim: usize) -> Result<Vec<f64>> {
        let sd = match self.proposal_sd.len() {
            1 => vec![self.proposal_sd[0]; dim],
            n if n == dim => self.proposal_sd.clone(),
            n => return Err(Error::DimensionMismatch { expected: dim, got: n }),
        };
        if let Some(bad) = sd.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::InvalidArgument(format!("proposal sd must be positive and finite, got {bad}")));
        }
        Ok(sd)
    }
}

/// The Metropolis test in log space: accept iff `ln V < log_ratio`.
pub fn mh_accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    let v: f64 = 1.0 - rng.random::<f64>();
    v.ln() < log_ratio
}

/// Gaussian random-walk chain with the same burn-in / thinning / trace
/// conventions as [`crate::asg::run_asg`]. Rejections repeat the state.
pub fn run_rwmh(kernel: &LogKernel, x0: Option<&[f64]>, config: &RwmhConfig) -> Result<ChainOutput> {
    let cfg = &config.chain;
    cfg.validate()?;
    let m = kernel.dim();
    let sd = config.scales(m)?;
    let mut rng = chain_rng(cfg.seed, cfg.stream);
    let x0 = match x0 {
        Some(x) => x.to_vec(),
        None => default_x0(kernel, cfg.fallback_range, &mut rng)?,
    };
    kernel.check_point(&x0)?;
    let mut log_k = kernel.log_eval(&x0);
    if !log_k.is_finite() {
        return Err(Error::InvalidState(format!("initial point {x0:?} has K = 0")));
    }
    let total = cfg.total_iterations();
    let mut x = x0.clone();
    let mut proposal = x0.clone();
    let mut samples = Vec::with_capacity(cfg.n_samples);
    let mut trace = Vec::with_capacity(total);
    let mut accepted = 0usize;

    let start = Instant::now();
    for t in 1..=total {
        for ((p, xi), s) in proposal.iter_mut().zip(&x).zip(&sd) {
            let e: f64 = rng.sample(StandardNormal);
            *p = xi + s * e;
        }
        let log_k_new = kernel.log_eval(&proposal);
        if mh_accept(log_k_new - log_k, &mut rng) {
            x.copy_from_slice(&proposal);
            log_k = log_k_new;
            accepted += 1;
        }
        trace.push(log_k);
        if t > cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0 {
            samples.push(x.clone());
        }
    }
    let wall_time_seconds = start.elapsed().as_secs_f64();

    Ok(ChainOutput {
        sampler: SamplerKind::Rwmh,
        dim: m,
        samples,
        log_k_trace: trace,
        bracket_history: Vec::new(),
        wall_time_seconds,
        coordinate_updates: 0,
        proposals: total,
        cap_hits: 0,
        fallback_uses: 0,
        acceptance_rate: Some(accepted as f64 / total as f64),
        x0,
        config: cfg.clone(),
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{reference_kernel, Params};

    #[test]
    fn flat_box_accepts_everything_inside() {
        let mut p = Params::new();
        p.insert("lo".into(), -1e6);
        p.insert("hi".into(), 1e6);
        let k = reference_kernel("indicator", &p).unwrap();
        let cfg = RwmhConfig::new(
            ChainConfig {
                n_samples: 500,
                burn_in: 0,
                ..Default::default()
            },
            0.1,
        );
        let out = run_rwmh(&k, Some(&[0.0]), &cfg).unwrap();
        assert_eq!(out.acceptance_rate, Some(1.0));
    }

    #[test]
    fn rejections_repeat_the_state() {
        let k = reference_kernel("std_normal", &Params::new()).unwrap();
        let cfg = RwmhConfig::new(
            ChainConfig {
                n_samples: 300,
                burn_in: 0,
                seed: 4,
                ..Default::default()
            },
            10.0,
        );
        let out = run_rwmh(&k, None, &cfg).unwrap();
        let rate = out.acceptance_rate.unwrap();
        assert!(rate > 0.0 && rate < 0.5);
        let repeats = out.samples.windows(2).filter(|w| w[0] == w[1]).count();
        assert!(repeats > 100);
        assert_eq!(out.log_k_trace.len(), 300);
    }

    #[test]
    fn proposal_scale_validation() {
        let k = reference_kernel("std_normal", &Params::new()).unwrap();
        for sd in [vec![0.0], vec![1.0, 1.0], vec![f64::NAN]] {
            let cfg = RwmhConfig {
                proposal_sd: sd,
                ..Default::default()
            };
            assert!(run_rwmh(&k, None, &cfg).is_err());
        }
    }

    #[test]
    fn config_serde_is_flat() {
        let cfg: RwmhConfig = serde_json::from_str(r#"{"n_samples": 12, "proposal_sd": [0.5]}"#).unwrap();
        assert_eq!(cfg.chain.n_samples, 12);
        assert_eq!(cfg.proposal_sd, vec![0.5]);
        let back: RwmhConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
