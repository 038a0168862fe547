//! The automated sliced Gibbs chain.
//!
//! Each sweep draws one slice height `log u` from the current state and then
//! updates every coordinate in turn: the conditional `g_k` is taken at the
//! partially updated state, its effective support `[a_k, b_k]` is estimated
//! afresh, and `x_k` is redrawn uniformly from `{z in [a_k, b_k] : g_k(z) > u}`.
//! Since each accepted value keeps `K > u`, the height stays valid for the
//! whole sweep.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Conditional1D, LogDensity1D, LogKernel};
use crate::rng::{chain_rng, ChainRng};
use crate::slice::{slice_1d_fixed_u, slice_height, DEFAULT_MAX_REJECTIONS};
use crate::support::{effective_support_1d, SupportMethod, SupportOptions, DEFAULT_FALLBACK_RANGE};

/// Cap hits above this fraction of coordinate updates raise a warning.
pub const CAP_HIT_WARN_RATE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanOrder {
    #[default]
    Systematic,
    /// A fresh random permutation of the coordinates every sweep.
    RandomPermutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Asg,
    Rwmh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    pub n_samples: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub epsilon: f64,
    pub s0: f64,
    pub seed: u64,
    /// RNG stream index, for independent chains under one seed.
    pub stream: u64,
    pub scan: ScanOrder,
    pub max_rejections: usize,
    pub fallback_range: (f64, f64),
    /// Reuse the previous bracket of a coordinate when its conditioning
    /// values are bit-identical to the last time it was updated.
    pub reuse_bracket_if_unchanged: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            burn_in: 250,
            thin: 1,
            epsilon: 0.01,
            s0: 1.0,
            seed: 0,
            stream: 0,
            scan: ScanOrder::Systematic,
            max_rejections: DEFAULT_MAX_REJECTIONS,
            fallback_range: DEFAULT_FALLBACK_RANGE,
            reuse_bracket_if_unchanged: false,
        }
    }
}

impl ChainConfig {
    /// `T = B + N L`.
    pub fn total_iterations(&self) -> usize {
        self.burn_in + self.n_samples * self.thin
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_samples < 1 {
            return bad("n_samples must be at least 1".into());
        }
        if self.thin < 1 {
            return bad("thin must be at least 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return bad(format!("s0 must be positive, got {}", self.s0));
        }
        if self.max_rejections < 1 {
            return bad("max_rejections must be at least 1".into());
        }
        let (lo, hi) = self.fallback_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad(format!("invalid fallback range [{lo}, {hi}]"));
        }
        self.n_samples
            .checked_mul(self.thin)
            .and_then(|v| v.checked_add(self.burn_in))
            .ok_or_else(|| Error::InvalidArgument("total iteration count overflows".into()))?;
        Ok(())
    }

    fn support_options(&self) -> SupportOptions {
        SupportOptions {
            epsilon: self.epsilon,
            s0: self.s0,
            fallback_range: self.fallback_range,
            ..SupportOptions::default()
        }
    }
}

/// Current point of a chain plus per-coordinate warm-start brackets.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub x: Vec<f64>,
    pub log_k: f64,
    pub brackets: Vec<(f64, f64)>,
    pub iteration: usize,
    // conditioning values each bracket was computed under
    conditioning: Vec<Option<Vec<f64>>>,
}

impl ChainState {
    pub fn new(kernel: &LogKernel, x0: &[f64], fallback_range: (f64, f64)) -> Result<Self> {
        kernel.check_point(x0)?;
        let log_k = kernel.log_eval(x0);
        if !log_k.is_finite() {
            return Err(Error::InvalidState(format!(
                "initial point {x0:?} has K = 0 (log K = {log_k})"
            )));
        }
        Ok(Self {
            x: x0.to_vec(),
            log_k,
            brackets: vec![fallback_range; x0.len()],
            iteration: 0,
            conditioning: vec![None; x0.len()],
        })
    }
}

/// Counters from one sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweepStats {
    pub log_u: f64,
    pub proposals: usize,
    pub cap_hits: usize,
    pub fallback_uses: usize,
    pub reused_brackets: usize,
    pub support_evaluations: usize,
}

/// Result of a chain run, shared by both samplers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub sampler: SamplerKind,
    pub dim: usize,
    /// `N` retained rows, iterations `B + jL`.
    pub samples: Vec<Vec<f64>>,
    /// `log K` after every one of the `T` iterations, burn-in included.
    pub log_k_trace: Vec<f64>,
    /// Per iteration, per coordinate `[a_k, b_k]` (empty for RW-MH).
    pub bracket_history: Vec<Vec<(f64, f64)>>,
    pub wall_time_seconds: f64,
    pub coordinate_updates: usize,
    pub proposals: usize,
    pub cap_hits: usize,
    pub fallback_uses: usize,
    /// RW-MH only.
    pub acceptance_rate: Option<f64>,
    pub x0: Vec<f64>,
    pub config: ChainConfig,
    pub warnings: Vec<String>,
}

impl ChainOutput {
    pub fn cap_hit_rate(&self) -> f64 {
        if self.coordinate_updates == 0 {
            0.0
        } else {
            self.cap_hits as f64 / self.coordinate_updates as f64
        }
    }

    /// Column `j` of the retained samples.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.samples.iter().map(|r| r[j]).collect()
    }
}

/// `0` if `K(0) > 0`, else the best of 100 uniform probes of the fallback box.
pub fn default_x0<R: Rng + ?Sized>(kernel: &LogKernel, fallback_range: (f64, f64), rng: &mut R) -> Result<Vec<f64>> {
    let zero = vec![0.0; kernel.dim()];
    if kernel.log_eval(&zero).is_finite() {
        return Ok(zero);
    }
    let (lo, hi) = fallback_range;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..100 {
        let x: Vec<f64> = (0..kernel.dim()).map(|_| rng.random_range(lo..hi)).collect();
        let v = kernel.log_eval(&x);
        if v.is_finite() && best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, x));
        }
    }
    best.map(|(_, x)| x).ok_or_else(|| {
        Error::InvalidState(format!(
            "no starting point with K > 0 found: K(0) = 0 and 100 probes of [{lo}, {hi}]^{} failed",
            kernel.dim()
        ))
    })
}

fn update_coordinate<G: LogDensity1D + ?Sized, R: Rng + ?Sized>(
    g: &G,
    state: &mut ChainState,
    k: usize,
    log_u: f64,
    config: &ChainConfig,
    rng: &mut R,
    stats: &mut SweepStats,
) -> Result<()> {
    let current = state.x[k];
    let reuse = config.reuse_bracket_if_unchanged && {
        let cond = &state.conditioning[k];
        cond.as_ref().is_some_and(|c| {
            c.len() + 1 == state.x.len()
                && state
                    .x
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != k)
                    .zip(c)
                    .all(|((_, a), b)| a.to_bits() == b.to_bits())
        })
    };
    let (a, b) = if reuse {
        stats.reused_brackets += 1;
        state.brackets[k]
    } else {
        let opts = SupportOptions {
            warm_start: Some(state.brackets[k]),
            anchor: Some(current),
            log_offset: Some(g.log_density(current)),
            ..config.support_options()
        };
        let est = effective_support_1d(g, &opts)?;
        stats.support_evaluations += est.evaluations;
        if est.method == SupportMethod::GridFallback {
            stats.fallback_uses += 1;
        }
        if config.reuse_bracket_if_unchanged {
            let cond = state
                .x
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, v)| *v)
                .collect();
            state.conditioning[k] = Some(cond);
        }
        (est.lower, est.upper)
    };
    state.brackets[k] = (a, b);
    let (z, draw) = slice_1d_fixed_u(g, log_u, a, b, current, rng, config.max_rejections)?;
    stats.proposals += draw.proposals;
    stats.cap_hits += usize::from(draw.hit_cap);
    state.x[k] = z;
    Ok(())
}

/// One sweep: a single height shared by `m` coordinate updates.
pub fn single_sweep<R: Rng + ?Sized>(
    state: &mut ChainState,
    kernel: &LogKernel,
    config: &ChainConfig,
    rng: &mut R,
) -> Result<SweepStats> {
    let m = kernel.dim();
    kernel.check_point(&state.x)?;
    let log_u = slice_height(state.log_k, rng)?;
    let mut stats = SweepStats {
        log_u,
        ..Default::default()
    };
    let mut order: Vec<usize> = (0..m).collect();
    if config.scan == ScanOrder::RandomPermutation {
        order.shuffle(rng);
    }
    for k in order {
        let point = state.x.clone();
        match kernel.conditional_evaluator(k, &point) {
            Some(fast) => update_coordinate(&*fast, state, k, log_u, config, rng, &mut stats)?,
            None => {
                let g = Conditional1D::at_point(kernel, k, &point);
                update_coordinate(&g, state, k, log_u, config, rng, &mut stats)?
            }
        }
        debug_assert!(
            kernel.log_eval(&state.x) > log_u,
            "slice membership lost at coordinate {k}: log K = {} <= log u = {log_u}",
            kernel.log_eval(&state.x)
        );
    }
    state.log_k = kernel.log_eval(&state.x);
    if !state.log_k.is_finite() {
        return Err(Error::InvalidState(format!("sweep left the support: log K = {}", state.log_k)));
    }
    state.iteration += 1;
    Ok(stats)
}

/// Runs `T = B + N L` sweeps from `x0` (or [`default_x0`]) and keeps
/// iterations `B + jL`, `j = 1..N`.
pub fn run_asg(kernel: &LogKernel, x0: Option<&[f64]>, config: &ChainConfig) -> Result<ChainOutput> {
    config.validate()?;
    let mut rng: ChainRng = chain_rng(config.seed, config.stream);
    let x0 = match x0 {
        Some(x) => x.to_vec(),
        None => default_x0(kernel, config.fallback_range, &mut rng)?,
    };
    let mut state = ChainState::new(kernel, &x0, config.fallback_range)?;
    let total = config.total_iterations();
    let m = kernel.dim();
    let mut samples = Vec::with_capacity(config.n_samples);
    let mut trace = Vec::with_capacity(total);
    let mut brackets = Vec::with_capacity(total);
    let (mut proposals, mut cap_hits, mut fallback_uses) = (0, 0, 0);

    let start = Instant::now();
    for t in 1..=total {
        let st = single_sweep(&mut state, kernel, config, &mut rng)?;
        proposals += st.proposals;
        cap_hits += st.cap_hits;
        fallback_uses += st.fallback_uses;
        trace.push(state.log_k);
        brackets.push(state.brackets.clone());
        if t > config.burn_in && (t - config.burn_in) % config.thin == 0 {
            samples.push(state.x.clone());
        }
    }
    let wall_time_seconds = start.elapsed().as_secs_f64();

    let coordinate_updates = total * m;
    let mut warnings = Vec::new();
    let rate = cap_hits as f64 / coordinate_updates as f64;
    if rate > CAP_HIT_WARN_RATE {
        warnings.push(format!(
            "rejection cap hit in {cap_hits} of {coordinate_updates} coordinate updates ({:.3}%); \
             the chain kept the current value in those updates",
            100.0 * rate
        ));
    }
    Ok(ChainOutput {
        sampler: SamplerKind::Asg,
        dim: m,
        samples,
        log_k_trace: trace,
        bracket_history: brackets,
        wall_time_seconds,
        coordinate_updates,
        proposals,
        cap_hits,
        fallback_uses,
        acceptance_rate: None,
        x0,
        config: config.clone(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{make_kernel, reference_kernel, Params};

    fn params(kv: &[(&str, f64)]) -> Params {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn bookkeeping() {
        let k = make_kernel("rosenbrock", &Params::new(), None).unwrap();
        let cfg = ChainConfig {
            n_samples: 7,
            burn_in: 3,
            thin: 2,
            seed: 11,
            ..Default::default()
        };
        let out = run_asg(&k, None, &cfg).unwrap();
        assert_eq!(out.samples.len(), 7);
        assert_eq!(out.log_k_trace.len(), 17);
        assert_eq!(out.bracket_history.len(), 17);
        assert_eq!(out.coordinate_updates, 34);
        assert_eq!(out.x0, vec![0.0, 0.0]);
        // retained rows are iterations 5, 7, .., 17
        for (j, row) in out.samples.iter().enumerate() {
            let t = 3 + 2 * (j + 1);
            assert_eq!(k.log_eval(row), out.log_k_trace[t - 1]);
        }
    }

    #[test]
    fn deterministic_replay() {
        let k = make_kernel("beta_mixture", &Params::new(), None).unwrap();
        let cfg = ChainConfig {
            n_samples: 50,
            burn_in: 10,
            seed: 3,
            ..Default::default()
        };
        let a = run_asg(&k, None, &cfg).unwrap();
        let b = run_asg(&k, None, &cfg).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.log_k_trace, b.log_k_trace);
        let c = run_asg(&k, None, &ChainConfig { stream: 1, ..cfg }).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn default_start_probes_when_origin_is_outside() {
        let k = reference_kernel("indicator", &params(&[("lo", 2.0), ("hi", 3.0)])).unwrap();
        let mut rng = chain_rng(1, 0);
        let x0 = default_x0(&k, (-100.0, 100.0), &mut rng);
        // 100 probes of a width-1 interval in a width-200 box may all miss
        match x0 {
            Ok(x) => assert!(x[0] > 2.0 && x[0] < 3.0),
            Err(e) => assert!(matches!(e, Error::InvalidState(_))),
        }
        let x0 = default_x0(&k, (1.0, 4.0), &mut rng).unwrap();
        assert!(x0[0] > 2.0 && x0[0] < 3.0);
    }

    #[test]
    fn rejects_zero_density_start_and_bad_config() {
        let k = make_kernel("ackley", &Params::new(), None).unwrap();
        assert!(matches!(
            run_asg(&k, Some(&[9.0, 0.0]), &ChainConfig::default()),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            run_asg(&k, Some(&[0.0]), &ChainConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        for cfg in [
            ChainConfig { thin: 0, ..Default::default() },
            ChainConfig { n_samples: 0, ..Default::default() },
            ChainConfig { epsilon: 1.0, ..Default::default() },
            ChainConfig { s0: 0.0, ..Default::default() },
            ChainConfig { fallback_range: (1.0, 1.0), ..Default::default() },
        ] {
            assert!(run_asg(&k, None, &cfg).is_err());
        }
    }

    #[test]
    fn sweep_keeps_slice_membership_and_exact_log_k() {
        let k = make_kernel("rosenbrock", &Params::new(), None).unwrap();
        let cfg = ChainConfig::default();
        let mut state = ChainState::new(&k, &[0.0, 0.0], cfg.fallback_range).unwrap();
        let mut rng = chain_rng(5, 0);
        for _ in 0..200 {
            let st = single_sweep(&mut state, &k, &cfg, &mut rng).unwrap();
            assert!(state.log_k > st.log_u);
            assert_eq!(state.log_k, k.log_eval(&state.x));
        }
        assert_eq!(state.iteration, 200);
    }

    #[test]
    fn bracket_reuse_only_when_conditioning_is_identical() {
        let k = reference_kernel("std_normal", &params(&[("dim", 1.0)])).unwrap();
        let cfg = ChainConfig {
            reuse_bracket_if_unchanged: true,
            ..Default::default()
        };
        let mut state = ChainState::new(&k, &[0.0], cfg.fallback_range).unwrap();
        let mut rng = chain_rng(5, 0);
        let first = single_sweep(&mut state, &k, &cfg, &mut rng).unwrap();
        assert_eq!(first.reused_brackets, 0);
        let second = single_sweep(&mut state, &k, &cfg, &mut rng).unwrap();
        assert_eq!(second.reused_brackets, 1);

        let k = make_kernel("rosenbrock", &Params::new(), None).unwrap();
        let mut state = ChainState::new(&k, &[0.0, 0.0], cfg.fallback_range).unwrap();
        single_sweep(&mut state, &k, &cfg, &mut rng).unwrap();
        let st = single_sweep(&mut state, &k, &cfg, &mut rng).unwrap();
        assert_eq!(st.reused_brackets, 0);
    }

    #[test]
    fn random_scan_runs() {
        let k = make_kernel("squiggle", &Params::new(), None).unwrap();
        let cfg = ChainConfig {
            n_samples: 100,
            burn_in: 10,
            scan: ScanOrder::RandomPermutation,
            ..Default::default()
        };
        let out = run_asg(&k, None, &cfg).unwrap();
        assert_eq!(out.samples.len(), 100);
        assert!(out.log_k_trace.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn config_serde_fills_defaults() {
        let cfg: ChainConfig = serde_json::from_str(r#"{"n_samples": 5, "scan": "random_permutation"}"#).unwrap();
        assert_eq!(cfg.n_samples, 5);
        assert_eq!(cfg.burn_in, 250);
        assert_eq!(cfg.scan, ScanOrder::RandomPermutation);
    }
}
