//! One-dimensional adaptive quadrature, bracketed root finding and bounded
//! scalar minimization.
//!
//! The quadrature is a globally adaptive 7/15-point Gauss–Kronrod scheme: the
//! panel with the largest error estimate is bisected until the summed error
//! meets `max(abs_tol, rel_tol * |value|)`. The final panel partition is kept
//! around (see [`Partition`]) so that running integrals `∫_lo^x f` can be
//! evaluated cheaply after the fact, which is what the support estimator
//! needs to invert a CDF.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const DEFAULT_REL_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_DEPTH: u32 = 50;
pub const DEFAULT_MAX_PANELS: usize = 4000;
pub const DEFAULT_ROOT_X_TOL: f64 = 1e-10;
pub const DEFAULT_ROOT_F_TOL: f64 = 1e-9;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of [`adaptive_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    /// Integrand evaluations that were NaN or infinite and replaced by zero.
    pub non_finite: usize,
    /// False when the tolerance could not be met within the depth/panel
    /// limits, or when more than half the evaluations were non-finite.
    /// `value` then holds the best estimate reached.
    pub converged: bool,
}

/// Tolerances and limits for the adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: DEFAULT_ABS_TOL,
            rel_tol: DEFAULT_REL_TOL,
            max_depth: DEFAULT_MAX_DEPTH,
            max_panels: DEFAULT_MAX_PANELS,
        }
    }
}

/// Sanitizing wrapper: non-finite values count as zero.
struct Counted<'a, F> {
    f: &'a F,
    evaluations: usize,
    non_finite: usize,
}

impl<F: Fn(f64) -> f64> Counted<'_, F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_finite() {
            v
        } else {
            self.non_finite += 1;
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct RuleResult {
    value: f64,
    error: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn gk15<F: Fn(f64) -> f64>(f: &mut Counted<'_, F>, lo: f64, hi: f64) -> RuleResult {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f.eval(center);
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    let mut res_g = f_center * WG[3];
    let mut res_k = f_center * WGK[7];
    let mut res_abs = res_k.abs();
    for j in 0..3 {
        let k = 2 * j + 1;
        let dx = half * XGK[k];
        let (a, b) = (f.eval(center - dx), f.eval(center + dx));
        fv1[k] = a;
        fv2[k] = b;
        res_g += WG[j] * (a + b);
        res_k += WGK[k] * (a + b);
        res_abs += WGK[k] * (a.abs() + b.abs());
    }
    for j in 0..4 {
        let k = 2 * j;
        let dx = half * XGK[k];
        let (a, b) = (f.eval(center - dx), f.eval(center + dx));
        fv1[k] = a;
        fv2[k] = b;
        res_k += WGK[k] * (a + b);
        res_abs += WGK[k] * (a.abs() + b.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for k in 0..7 {
        res_asc += WGK[k] * ((fv1[k] - mean).abs() + (fv2[k] - mean).abs());
    }
    let width = half.abs();
    RuleResult {
        value: res_k * half,
        error: rescale_error((res_k - res_g) * half, res_abs * width, res_asc * width),
    }
}

/// Single 15-point Kronrod estimate of `∫_lo^hi f`; non-finite values count
/// as zero.
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let mut c = Counted {
        f,
        evaluations: 0,
        non_finite: 0,
    };
    let r = gk15(&mut c, lo, hi);
    (r.value, r.error)
}

/// A panel of the adaptive partition.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
    pub error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// The converged (or best-effort) panel partition of an integration range,
/// ordered left to right, with prefix sums for running integrals.
#[derive(Debug, Clone)]
pub(crate) struct Partition {
    pub panels: Vec<Panel>,
    /// `prefix[i]` = sum of panel values strictly left of panel `i`.
    prefix: Vec<f64>,
    pub result: QuadResult,
}

impl Partition {
    pub fn lo(&self) -> f64 {
        self.panels[0].lo
    }

    pub fn hi(&self) -> f64 {
        self.panels[self.panels.len() - 1].hi
    }

    /// `∫_lo^x f` using the stored panels plus one Kronrod rule on the
    /// partial panel containing `x`.
    pub fn integral_to<F: Fn(f64) -> f64>(&self, f: &F, x: f64) -> f64 {
        if x <= self.lo() {
            return 0.0;
        }
        if x >= self.hi() {
            return self.result.value;
        }
        let i = self.panels.partition_point(|p| p.hi <= x);
        let p = &self.panels[i];
        if x <= p.lo {
            return self.prefix[i];
        }
        let (partial, _) = gauss_kronrod_15(f, p.lo, x);
        self.prefix[i] + partial.clamp(0.0_f64.min(p.value), p.value.max(0.0))
    }
}

/// Adaptive partition of the range spanned by `breakpoints` (at least two,
/// strictly increasing). Each initial gap becomes one starting panel.
pub(crate) fn adaptive_partition<F: Fn(f64) -> f64>(
    f: &F,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Partition {
    let mut counted = Counted {
        f,
        evaluations: 0,
        non_finite: 0,
    };
    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        let r = gk15(&mut counted, w[0], w[1]);
        heap.push(Panel {
            lo: w[0],
            hi: w[1],
            value: r.value,
            error: r.error,
            depth: 0,
        });
    }
    let mut finished: Vec<Panel> = Vec::new();
    let mut converged = true;
    let mut value: f64 = heap.iter().map(|p| p.value).sum();
    let mut error: f64 = heap.iter().map(|p| p.error).sum();
    loop {
        // panels retired at the depth limit are accepted as they are; the
        // tolerance applies to what can still be refined
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            // the running sums can drift; confirm before stopping
            value = heap.iter().chain(finished.iter()).map(|p| p.value).sum();
            error = heap.iter().map(|p| p.error).sum();
            if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
                break;
            }
        }
        if heap.len() + finished.len() >= opts.max_panels {
            converged = false;
            break;
        }
        let Some(worst) = heap.pop() else {
            converged = false;
            break;
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if worst.depth >= opts.max_depth || mid <= worst.lo || mid >= worst.hi {
            error -= worst.error;
            finished.push(worst);
            converged = false;
            continue;
        }
        let left = gk15(&mut counted, worst.lo, mid);
        let right = gk15(&mut counted, mid, worst.hi);
        // The Kronrod/Gauss difference can badly underestimate the error at
        // kinks and jumps; the parent/children discrepancy does not.
        let split_gap = 0.5 * (worst.value - (left.value + right.value)).abs();
        value += left.value + right.value - worst.value;
        error += left.error.max(split_gap) + right.error.max(split_gap) - worst.error;
        for (lo, hi, r) in [(worst.lo, mid, left), (mid, worst.hi, right)] {
            heap.push(Panel {
                lo,
                hi,
                value: r.value,
                error: r.error.max(split_gap),
                depth: worst.depth + 1,
            });
        }
    }
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(finished);
    panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut prefix = Vec::with_capacity(panels.len());
    let mut acc = 0.0;
    let mut err = 0.0;
    for p in &panels {
        prefix.push(acc);
        acc += p.value;
        err += p.error;
    }
    if 2 * counted.non_finite > counted.evaluations || !acc.is_finite() {
        converged = false;
    }
    Partition {
        panels,
        prefix,
        result: QuadResult {
            value: acc,
            abs_error_estimate: err,
            evaluations: counted.evaluations,
            non_finite: counted.non_finite,
            converged,
        },
    }
}

/// Adaptive quadrature of `f` over `(lo, hi)`.
///
/// Returns an error only for an invalid interval; failure to meet the
/// tolerance is reported through [`QuadResult::converged`].
pub fn adaptive_quadrature<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_depth: u32,
) -> Result<QuadResult> {
    adaptive_quadrature_with(
        f,
        lo,
        hi,
        &QuadOptions {
            abs_tol,
            rel_tol,
            max_depth,
            ..QuadOptions::default()
        },
    )
}

pub fn adaptive_quadrature_with<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "quadrature interval [{lo}, {hi}] must be finite with lo < hi"
        )));
    }
    Ok(adaptive_partition(&f, &[lo, hi], opts).result)
}

/// Outcome of [`find_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Brent's method: inverse quadratic / secant steps guarded by bisection.
///
/// Stops when `|f(x)| <= f_tol` or the bracket has shrunk below `x_tol`.
pub fn find_root<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    x_tol: f64,
    f_tol: f64,
) -> Result<RootResult> {
    if !(lo < hi) {
        return Err(Error::InvalidBracket { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.abs() <= f_tol {
        return Ok(RootResult {
            root: a,
            residual: fa,
            iterations: 0,
        });
    }
    if fb.abs() <= f_tol {
        return Ok(RootResult {
            root: b,
            residual: fb,
            iterations: 0,
        });
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::NoSignChange {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for iter in 1..=200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= f_tol {
            return Ok(RootResult {
                root: b,
                residual: fb,
                iterations: iter,
            });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 {
            d
        } else {
            tol1.copysign(xm)
        };
        fb = f(b);
    }
    Ok(RootResult {
        root: b,
        residual: fb,
        iterations: 200,
    })
}

/// Brent's bounded minimization (golden section with parabolic steps).
/// Returns `(argmin, min)`.
pub fn minimize_bounded<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, x_tol: f64) -> (f64, f64) {
    const GOLDEN: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0_f64, 0.0_f64);
    for _ in 0..500 {
        let xm = 0.5 * (a + b);
        let tol1 = 1e-11 * x.abs() + x_tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}
