//! Fixed-height slice draws by rejection from a bracketing interval.

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::LogDensity1D;

pub const DEFAULT_MAX_REJECTIONS: usize = 10_000;

/// Bookkeeping for one slice draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceDrawStats {
    /// Proposals made, including the accepted one.
    pub proposals: usize,
    pub accepted_value: f64,
    /// The rejection cap was reached and the current value kept.
    pub hit_cap: bool,
}

/// `log u = log K(x) + log V`, `V ~ U(0, 1)`: a height uniform under `K(x)`,
/// never leaving log space.
pub fn slice_height<R: Rng + ?Sized>(log_k_current: f64, rng: &mut R) -> Result<f64> {
    if !log_k_current.is_finite() {
        return Err(Error::InvalidState(format!(
            "slice height needs a finite log K at the current state, got {log_k_current}"
        )));
    }
    // `random` is on [0, 1); 1 - V is on (0, 1], keeping ln finite
    let v: f64 = 1.0 - rng.random::<f64>();
    Ok(log_k_current + v.ln())
}

/// Draws uniformly from `{z in [a, b] : log g(z) > log_u}` by proposing
/// uniformly on `[a, b]`. After `max_rejections` misses returns `current`,
/// which lies in the slice by precondition.
pub fn slice_1d_fixed_u<G, R>(
    g: &G,
    log_u: f64,
    a: f64,
    b: f64,
    current: f64,
    rng: &mut R,
    max_rejections: usize,
) -> Result<(f64, SliceDrawStats)>
where
    G: LogDensity1D + ?Sized,
    R: Rng + ?Sized,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidBracket { lo: a, hi: b });
    }
    let log_g_current = g.log_density(current);
    if !(log_g_current > log_u) {
        return Err(Error::SliceInvariant { log_g_current, log_u });
    }
    let width = b - a;
    let mut proposals = 0;
    while proposals < max_rejections {
        proposals += 1;
        let z = a + width * rng.random::<f64>();
        if g.log_density(z) > log_u {
            return Ok((
                z,
                SliceDrawStats {
                    proposals,
                    accepted_value: z,
                    hit_cap: false,
                },
            ));
        }
    }
    Ok((
        current,
        SliceDrawStats {
            proposals,
            accepted_value: current,
            hit_cap: true,
        },
    ))
}
