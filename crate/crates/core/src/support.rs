//! Effective support of a one-dimensional kernel.
//!
//! The interval `[a, b]` leaves mass `ε/2` of the normalized kernel in each
//! tail. The primary path pulls the kernel back to `(0, 1)` through a Cauchy
//! quantile map, where the heavy Cauchy tails keep the transformed integrand
//! bounded for anything that decays at least like `1/x²`:
//!
//! ```text
//! K*(u) = g(Q_C(u)) / f_C(Q_C(u)),   Z = ∫₀¹ K*,   F*(u) = ∫₀ᵘ K* / Z
//! ```
//!
//! and solves `F*(u_a) = ε/2`, `1 - F*(u_b) = ε/2`. When that quadrature
//! fails, a thresholded grid over a fixed range is integrated in `x` instead.
//!
//! Everything is computed relative to an offset `e^{log_offset}` (the current
//! kernel value, or the largest probe) so that `Z` stays O(1) no matter how
//! small or large the raw kernel is.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::LogDensity1D;
use crate::numerics::{adaptive_partition, find_root, Partition, QuadOptions, DEFAULT_ROOT_F_TOL, DEFAULT_ROOT_X_TOL};

/// Clamp applied to `u` before the quantile map.
pub const U_CLAMP: f64 = 1e-12;
/// Largest exponent fed to `exp` in the transformed integrand.
pub const MAX_EXPONENT: f64 = 700.0;
/// Relative threshold defining the grid fallback's support.
pub const GRID_THRESHOLD: f64 = 1e-10;
pub const DEFAULT_FALLBACK_RANGE: (f64, f64) = (-100.0, 100.0);
pub const DEFAULT_GRID_POINTS: usize = 10_001;

const INITIAL_PANELS: usize = 16;
const MAX_CLAMP_FRACTION: f64 = 1e-3;
const MAX_GRID_POINTS: usize = 2_000_001;

/// Cauchy(0, s0) distribution function, density and quantile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyMaps {
    s0: f64,
}

pub fn cauchy_maps(s0: f64) -> Result<CauchyMaps> {
    CauchyMaps::new(s0)
}

impl CauchyMaps {
    pub fn new(s0: f64) -> Result<Self> {
        if !(s0 > 0.0 && s0.is_finite()) {
            return Err(Error::InvalidArgument(format!("Cauchy scale must be positive, got {s0}")));
        }
        Ok(Self { s0 })
    }

    pub fn scale(&self) -> f64 {
        self.s0
    }

    /// `F_C(x) = 1/2 + atan(x/s0)/π`. The tails are written as
    /// `atan(s0/|x|)/π` so that small probabilities keep full precision.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < -self.s0 {
            (self.s0 / -x).atan() / PI
        } else if x > self.s0 {
            1.0 - (self.s0 / x).atan() / PI
        } else {
            0.5 + (x / self.s0).atan() / PI
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.s0 / (PI * (self.s0 * self.s0 + x * x))
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let r = x / self.s0;
        -(PI * self.s0).ln() - r.mul_add(r, 1.0).ln()
    }

    /// `Q_C(u) = s0 tan(π(u - 1/2))`, with `u` clamped to `[1e-12, 1 - 1e-12]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(U_CLAMP, 1.0 - U_CLAMP);
        if u < 0.25 {
            -self.s0 / (PI * u).tan()
        } else if u > 0.75 {
            self.s0 / (PI * (1.0 - u)).tan()
        } else {
            self.s0 * (PI * (u - 0.5)).tan()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportMethod {
    CauchyTransform,
    GridFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportOptions {
    pub epsilon: f64,
    pub s0: f64,
    pub fallback_range: (f64, f64),
    pub grid_points: usize,
    /// Previous bracket; only ever widens the fallback range.
    pub warm_start: Option<(f64, f64)>,
    /// A point known to carry mass (the sampler's current coordinate). It is
    /// used as a quadrature breakpoint so narrow spikes are never missed.
    pub anchor: Option<f64>,
    /// `log g` at a representative point; defaults to the largest probe.
    pub log_offset: Option<f64>,
    pub quad: QuadOptions,
    pub root_x_tol: f64,
    pub root_f_tol: f64,
    /// Skip the Cauchy path (testing and diagnostics).
    pub force_grid: bool,
}

impl Default for SupportOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            s0: 1.0,
            fallback_range: DEFAULT_FALLBACK_RANGE,
            grid_points: DEFAULT_GRID_POINTS,
            warm_start: None,
            anchor: None,
            log_offset: None,
            quad: QuadOptions::default(),
            root_x_tol: DEFAULT_ROOT_X_TOL,
            root_f_tol: DEFAULT_ROOT_F_TOL,
            force_grid: false,
        }
    }
}

impl SupportOptions {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        let (lo, hi) = self.fallback_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!("invalid fallback range [{lo}, {hi}]")));
        }
        if self.grid_points < 3 {
            return Err(Error::InvalidArgument("fallback grid needs at least 3 points".into()));
        }
        Ok(())
    }
}

/// Equal-tailed effective support `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportEstimate {
    pub lower: f64,
    pub upper: f64,
    /// `∫ K`, i.e. `exp(log_norm_const)`; may be 0 or inf when the raw kernel
    /// is outside the double range — use `log_norm_const` then.
    pub norm_const: f64,
    pub log_norm_const: f64,
    pub method: SupportMethod,
    pub epsilon: f64,
    pub s0: f64,
    /// Kernel evaluations spent.
    pub evaluations: usize,
}

impl SupportEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Estimates the effective support of `g` (given as `log g`).
pub fn effective_support_1d<G: LogDensity1D + ?Sized>(g: &G, opts: &SupportOptions) -> Result<SupportEstimate> {
    opts.validate()?;
    let maps = CauchyMaps::new(opts.s0)?;
    if !opts.force_grid {
        if let Some(est) = cauchy_path(g, &maps, opts) {
            return Ok(est);
        }
    }
    grid_path(g, opts)
}

/// Solves `F(x) = ε/2` and `1 - F(x) = ε/2` for a non-decreasing `F` with
/// `F(lo) = 0`, `F(hi) = 1`, widening the default half-range brackets when the
/// mass sits entirely on one side of `mid`.
fn equal_tail_roots<F: Fn(f64) -> f64>(
    cdf: &F,
    lo: f64,
    mid: f64,
    hi: f64,
    eps: f64,
    x_tol: f64,
    f_tol: f64,
) -> std::result::Result<(f64, f64), &'static str> {
    let half = 0.5 * eps;
    let lower_fn = |x: f64| cdf(x) - half;
    let (a_lo, a_hi) = if lower_fn(mid) >= 0.0 { (lo, mid) } else { (mid, hi) };
    let a = find_root(lower_fn, a_lo, a_hi, x_tol, f_tol).map_err(|_| "lower")?.root;
    let upper_fn = |x: f64| 1.0 - cdf(x) - half;
    let b_lo = a.max(mid);
    let (b_lo, b_hi) = if upper_fn(b_lo) >= 0.0 { (b_lo, hi) } else { (a, b_lo) };
    let b = if b_lo < b_hi {
        find_root(upper_fn, b_lo, b_hi, x_tol, f_tol).map_err(|_| "upper")?.root
    } else {
        b_lo
    };
    Ok((a, b))
}

fn cauchy_path<G: LogDensity1D + ?Sized>(g: &G, maps: &CauchyMaps, opts: &SupportOptions) -> Option<SupportEstimate> {
    let evals = Cell::new(0usize);
    let log_g = |x: f64| {
        evals.set(evals.get() + 1);
        g.log_density(x)
    };

    let mut breaks: Vec<f64> = (0..=INITIAL_PANELS).map(|k| k as f64 / INITIAL_PANELS as f64).collect();
    let mut offset = opts.log_offset.filter(|v| v.is_finite()).unwrap_or(f64::NEG_INFINITY);
    for &u in &breaks[1..INITIAL_PANELS] {
        offset = offset.max(log_g(maps.quantile(u)));
    }
    if let Some(z) = opts.anchor.filter(|z| z.is_finite()) {
        offset = offset.max(log_g(z));
        let u = maps.cdf(z);
        if u > 0.0 && u < 1.0 {
            let i = breaks.partition_point(|&b| b < u);
            if breaks[i] != u {
                breaks.insert(i, u);
            }
        }
    }
    if !offset.is_finite() {
        return None;
    }

    let clamps = Cell::new(0usize);
    let integrand = |u: f64| {
        let x = maps.quantile(u);
        let lg = log_g(x);
        if lg == f64::NEG_INFINITY {
            return 0.0;
        }
        let mut e = lg - offset - maps.ln_pdf(x);
        if e > MAX_EXPONENT {
            clamps.set(clamps.get() + 1);
            e = MAX_EXPONENT;
        }
        e.exp()
    };
    let part = adaptive_partition(&integrand, &breaks, &opts.quad);
    let z = part.result.value;
    let r = &part.result;
    if !r.converged
        || !(z.is_finite() && z > 0.0)
        || clamps.get() as f64 > MAX_CLAMP_FRACTION * r.evaluations as f64
    {
        return None;
    }
    let cdf = |u: f64| (part.integral_to(&integrand, u) / z).clamp(0.0, 1.0);
    let (ua, ub) = equal_tail_roots(&cdf, 0.0, 0.5, 1.0, opts.epsilon, opts.root_x_tol, opts.root_f_tol).ok()?;
    let (lower, upper) = (maps.quantile(ua), maps.quantile(ub));
    if !(lower < upper) {
        return None;
    }
    let log_norm_const = z.ln() + offset;
    Some(SupportEstimate {
        lower,
        upper,
        norm_const: log_norm_const.exp(),
        log_norm_const,
        method: SupportMethod::CauchyTransform,
        epsilon: opts.epsilon,
        s0: maps.scale(),
        evaluations: evals.get(),
    })
}

fn grid_path<G: LogDensity1D + ?Sized>(g: &G, opts: &SupportOptions) -> Result<SupportEstimate> {
    let evals = Cell::new(0usize);
    let log_g = |x: f64| {
        evals.set(evals.get() + 1);
        let v = g.log_density(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    let (mut lo, mut hi) = opts.fallback_range;
    if let Some((a, b)) = opts.warm_start.filter(|(a, b)| a.is_finite() && b.is_finite()) {
        lo = lo.min(a);
        hi = hi.max(b);
    }
    let base_step = (opts.fallback_range.1 - opts.fallback_range.0) / (opts.grid_points - 1) as f64;
    let n = (((hi - lo) / base_step).ceil() as usize + 1).clamp(opts.grid_points, MAX_GRID_POINTS);
    let step = (hi - lo) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    grid[n - 1] = hi;
    if let Some(z) = opts.anchor.filter(|z| *z > lo && *z < hi) {
        let i = grid.partition_point(|&x| x < z);
        if grid[i] != z {
            grid.insert(i, z);
        }
    }
    let values: Vec<f64> = grid.iter().map(|&x| log_g(x)).collect();
    let peak = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Err(Error::UnsupportedKernel { lo, hi });
    }
    if peak == f64::INFINITY {
        return Err(Error::InvalidArgument("kernel is infinite at a grid point".into()));
    }
    let cut = peak + GRID_THRESHOLD.ln();
    let first = values.iter().position(|&v| v > cut).unwrap();
    let last = values.iter().rposition(|&v| v > cut).unwrap();
    // one cell of margin on each side
    let i0 = first.saturating_sub(1);
    let i1 = (last + 1).min(grid.len() - 1);
    let (x_lo, x_hi) = (grid[i0], grid[i1]);

    let integrand = |x: f64| {
        let v = log_g(x);
        if v == f64::NEG_INFINITY {
            0.0
        } else {
            (v - peak).min(MAX_EXPONENT).exp()
        }
    };
    let breaks = &grid[i0..=i1];
    let quad = QuadOptions {
        max_panels: opts.quad.max_panels + breaks.len(),
        ..opts.quad
    };
    let part: Partition = adaptive_partition(&integrand, breaks, &quad);
    let z = part.result.value;
    let probes = |cdf: &dyn Fn(f64) -> f64| -> Vec<(f64, f64)> {
        (0..=10)
            .map(|k| {
                let x = x_lo + (x_hi - x_lo) * k as f64 / 10.0;
                (x, cdf(x))
            })
            .collect()
    };
    if !(z.is_finite() && z > 0.0) {
        let raw = |x: f64| part.integral_to(&integrand, x);
        return Err(Error::SupportBracketing {
            side: "normalization",
            probes: probes(&raw),
        });
    }
    let cdf = |x: f64| (part.integral_to(&integrand, x) / z).clamp(0.0, 1.0);
    let mid = 0.5 * (x_lo + x_hi);
    let (lower, upper) = equal_tail_roots(&cdf, x_lo, mid, x_hi, opts.epsilon, opts.root_x_tol, opts.root_f_tol)
        .map_err(|side| Error::SupportBracketing {
            side,
            probes: probes(&cdf),
        })?;
    if !(lower < upper) {
        return Err(Error::SupportBracketing {
            side: "degenerate",
            probes: probes(&cdf),
        });
    }
    let log_norm_const = z.ln() + peak;
    Ok(SupportEstimate {
        lower,
        upper,
        norm_const: log_norm_const.exp(),
        log_norm_const,
        method: SupportMethod::GridFallback,
        epsilon: opts.epsilon,
        s0: opts.s0,
        evaluations: evals.get(),
    })
}
