//! Registry of benchmark kernels.

use std::f64::consts::{E, PI};
use std::sync::Arc;

use serde::Serialize;
use statrs::function::beta::ln_beta;

use super::{KernelFn, LogKernel, Params, RegressionData};
use crate::error::{Error, Result};

/// Registered kernels, in listing order.
pub const KERNEL_NAMES: [&str; 9] = [
    "beta_mixture",
    "rosenbrock",
    "ackley",
    "radial_exp",
    "lasso_bridge",
    "funnel",
    "hybrid_rosenbrock",
    "squiggle",
    "allen_cahn",
];

/// Catalog entry for `list-kernels`.
#[derive(Debug, Clone, Serialize)]
pub struct KernelInfo {
    pub name: &'static str,
    /// Dimension under default parameters; `None` when data-dependent.
    pub dim: Option<usize>,
    pub params: Vec<(&'static str, f64)>,
    pub requires_data: bool,
    pub description: &'static str,
}

fn defaults(name: &str) -> Option<&'static [(&'static str, f64)]> {
    Some(match name {
        "beta_mixture" | "rosenbrock" => &[],
        "ackley" => &[
            ("dim", 2.0),
            ("temp", 1.0),
            ("bound", 5.0),
            ("a", 20.0),
            ("b", 0.2),
            ("c", 2.0 * PI),
        ],
        "radial_exp" => &[("dim", 10.0)],
        "lasso_bridge" => &[("lambda", 0.1), ("alpha", 1.0)],
        "funnel" => &[("dim", 10.0), ("sigma", 3.0), ("mu", 0.0)],
        "hybrid_rosenbrock" => &[("a", 1.0), ("b", 100.0)],
        "squiggle" => &[("dim", 3.0), ("a", 1.5)],
        "allen_cahn" => &[("dim", 10.0), ("beta", 1.0), ("a", 0.1)],
        "std_normal" => &[("dim", 1.0)],
        "indicator" => &[("lo", 0.0), ("hi", 1.0)],
        _ => return None,
    })
}

pub fn kernel_catalog() -> Vec<KernelInfo> {
    KERNEL_NAMES
        .iter()
        .map(|&name| {
            let params = defaults(name).unwrap().to_vec();
            let (dim, description) = match name {
                "beta_mixture" => (Some(1), "three-component shifted/scaled Beta mixture"),
                "rosenbrock" => (Some(2), "banana-shaped Rosenbrock kernel"),
                "ackley" => (Some(2), "exp(-f/temp) for the Ackley function on [-bound, bound]^dim"),
                "radial_exp" => (Some(10), "exp(-||x||)"),
                "lasso_bridge" => (None, "LASSO / bridge regression loss kernel (dim = predictors + 1)"),
                "funnel" => (Some(10), "funnel with x_dim as the scale variable"),
                "hybrid_rosenbrock" => (Some(2), "hybrid Rosenbrock density"),
                "squiggle" => (Some(3), "Gaussian under the sine shear z_{2:D} = x_{2:D} + sin(a x_1)"),
                "allen_cahn" => (Some(10), "discretized Allen-Cahn path with zero boundary values"),
                _ => unreachable!(),
            };
            KernelInfo {
                name,
                dim,
                params,
                requires_data: name == "lasso_bridge",
                description,
            }
        })
        .collect()
}

/// Merges user params over defaults, rejecting unknown names.
fn merged(kernel: &str, user: &Params) -> Result<Params> {
    let defs = defaults(kernel).ok_or_else(|| Error::UnknownKernel(kernel.to_string()))?;
    let mut out: Params = defs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in user {
        if !out.contains_key(k) {
            return Err(Error::KernelParameter {
                kernel: kernel.to_string(),
                message: format!("unknown parameter `{k}`"),
            });
        }
        if !v.is_finite() {
            return Err(Error::KernelParameter {
                kernel: kernel.to_string(),
                message: format!("parameter `{k}` must be finite"),
            });
        }
        out.insert(k.clone(), *v);
    }
    Ok(out)
}

fn param_err(kernel: &str, message: impl Into<String>) -> Error {
    Error::KernelParameter {
        kernel: kernel.to_string(),
        message: message.into(),
    }
}

fn positive(kernel: &str, p: &Params, key: &str) -> Result<f64> {
    let v = p[key];
    if v > 0.0 {
        Ok(v)
    } else {
        Err(param_err(kernel, format!("`{key}` must be positive, got {v}")))
    }
}

fn dimension(kernel: &str, p: &Params, min: usize) -> Result<usize> {
    let v = p["dim"];
    if v.fract() != 0.0 || v < min as f64 || v > 100_000.0 {
        return Err(param_err(kernel, format!("`dim` must be an integer >= {min}, got {v}")));
    }
    Ok(v as usize)
}

/// Builds one of the registered kernels. Missing parameters take their
/// defaults; `lasso_bridge` requires `data`.
pub fn make_kernel(name: &str, params: &Params, data: Option<Arc<RegressionData>>) -> Result<LogKernel> {
    if !KERNEL_NAMES.contains(&name) {
        return Err(Error::UnknownKernel(name.to_string()));
    }
    build(name, params, data)
}

/// Reference kernels used for checking the support estimator and the sampler
/// against exact answers: `std_normal` (isotropic, `dim`) and `indicator`
/// (flat on the open interval `(lo, hi)`).
pub fn reference_kernel(name: &str, params: &Params) -> Result<LogKernel> {
    match name {
        "std_normal" | "indicator" => build(name, params, None),
        _ => Err(Error::UnknownKernel(name.to_string())),
    }
}

/// Registered kernel or reference kernel, by name.
pub fn resolve_kernel(name: &str, params: &Params, data: Option<Arc<RegressionData>>) -> Result<LogKernel> {
    if KERNEL_NAMES.contains(&name) {
        make_kernel(name, params, data)
    } else {
        reference_kernel(name, params)
    }
}

fn build(name: &str, user: &Params, data: Option<Arc<RegressionData>>) -> Result<LogKernel> {
    let p = merged(name, user)?;
    let (dim, inner): (usize, Arc<dyn KernelFn>) = match name {
        "beta_mixture" => (1, Arc::new(BetaMixture::new())),
        "rosenbrock" => (2, Arc::new(Rosenbrock)),
        "ackley" => {
            let dim = dimension(name, &p, 1)?;
            positive(name, &p, "temp")?;
            positive(name, &p, "bound")?;
            (
                dim,
                Arc::new(Ackley {
                    temp: p["temp"],
                    bound: p["bound"],
                    a: p["a"],
                    b: p["b"],
                    c: p["c"],
                }),
            )
        }
        "radial_exp" => (dimension(name, &p, 1)?, Arc::new(RadialExp)),
        "lasso_bridge" => {
            let data = data.ok_or_else(|| param_err(name, "regression data is required"))?;
            let lambda = p["lambda"];
            if lambda < 0.0 {
                return Err(param_err(name, "`lambda` must be non-negative"));
            }
            let alpha = positive(name, &p, "alpha")?;
            (data.n_pred() + 1, Arc::new(LassoBridge { data, lambda, alpha }))
        }
        "funnel" => {
            let dim = dimension(name, &p, 2)?;
            let sigma = positive(name, &p, "sigma")?;
            (dim, Arc::new(Funnel { sigma, mu: p["mu"] }))
        }
        "hybrid_rosenbrock" => {
            let b = positive(name, &p, "b")?;
            (2, Arc::new(HybridRosenbrock { a: p["a"], b }))
        }
        "squiggle" => (dimension(name, &p, 2)?, Arc::new(Squiggle { a: p["a"] })),
        "allen_cahn" => {
            let dim = dimension(name, &p, 1)?;
            let beta = positive(name, &p, "beta")?;
            let a = positive(name, &p, "a")?;
            (dim, Arc::new(AllenCahn { beta, a, ds: 1.0 / dim as f64 }))
        }
        "std_normal" => (dimension(name, &p, 1)?, Arc::new(StdNormal)),
        "indicator" => {
            let (lo, hi) = (p["lo"], p["hi"]);
            if !(lo < hi) {
                return Err(param_err(name, format!("need lo < hi, got ({lo}, {hi})")));
            }
            (1, Arc::new(Indicator { lo, hi }))
        }
        _ => return Err(Error::UnknownKernel(name.to_string())),
    };
    Ok(LogKernel::new(name, dim, p, inner))
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Mixture of three Beta densities, each mapped to the real line by
/// `t = (x - shift) / 2` with Jacobian 1/2.
struct BetaMixture {
    // (log weight incl. the 1/2 Jacobian, shift, a, b, ln B(a, b))
    comps: [(f64, f64, f64, f64, f64); 3],
}

impl BetaMixture {
    fn new() -> Self {
        let comp = |w: f64, shift: f64, a: f64, b: f64| ((0.5 * w).ln(), shift, a, b, ln_beta(a, b));
        Self {
            comps: [
                comp(0.3, -5.0, 0.5, 1.0),
                comp(0.4, -1.0, 2.0, 2.0),
                comp(0.3, 5.0, 1.0, 0.5),
            ],
        }
    }
}

impl KernelFn for BetaMixture {
    fn log_eval(&self, x: &[f64]) -> f64 {
        let mut terms = [f64::NEG_INFINITY; 3];
        for (t, &(lw, shift, a, b, lnb)) in terms.iter_mut().zip(&self.comps) {
            let u = (x[0] - shift) / 2.0;
            // open support: the a < 1 / b < 1 endpoints are singular
            if u > 0.0 && u < 1.0 {
                *t = lw + (a - 1.0) * u.ln() + (b - 1.0) * (1.0 - u).ln() - lnb;
            }
        }
        log_sum_exp(&terms)
    }
}

struct Rosenbrock;

impl KernelFn for Rosenbrock {
    fn log_eval(&self, x: &[f64]) -> f64 {
        let (x1, x2) = (x[0], x[1]);
        let r = x2 - x1 * x1;
        -x1 * x1 / 10.0 - x2 * x2 / 10.0 - 2.0 * r * r
    }
}

struct Ackley {
    temp: f64,
    bound: f64,
    a: f64,
    b: f64,
    c: f64,
}

impl Ackley {
    fn value(&self, x: &[f64]) -> f64 {
        let m = x.len() as f64;
        let sq = x.iter().map(|v| v * v).sum::<f64>() / m;
        let cs = x.iter().map(|v| (self.c * v).cos()).sum::<f64>() / m;
        -self.a * (-self.b * sq.sqrt()).exp() - cs.exp() + self.a + E
    }
}

impl KernelFn for Ackley {
    fn log_eval(&self, x: &[f64]) -> f64 {
        if x.iter().any(|v| !(v.abs() <= self.bound)) {
            return f64::NEG_INFINITY;
        }
        -self.value(x) / self.temp
    }
}

struct RadialExp;

impl KernelFn for RadialExp {
    fn log_eval(&self, x: &[f64]) -> f64 {
        -x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `-[ (1/2N) sum (y_i - b0 - z_i' b)^2 + lambda sum_{j>=1} |b_j|^alpha ]`.
/// The intercept is unpenalized.
struct LassoBridge {
    data: Arc<RegressionData>,
    lambda: f64,
    alpha: f64,
}

impl LassoBridge {
    fn penalty(&self, b: f64) -> f64 {
        if self.lambda == 0.0 {
            0.0
        } else {
            self.lambda * b.abs().powf(self.alpha)
        }
    }
}

impl KernelFn for LassoBridge {
    fn log_eval(&self, x: &[f64]) -> f64 {
        let d = &self.data;
        let n = d.n_obs();
        let mut rss = 0.0;
        for i in 0..n {
            let row = d.row(i);
            let fit = x[0] + row.iter().zip(&x[1..]).map(|(z, b)| z * b).sum::<f64>();
            let r = d.response()[i] - fit;
            rss += r * r;
        }
        let pen: f64 = x[1..].iter().map(|&b| self.penalty(b)).sum();
        -(rss / (2.0 * n as f64) + pen)
    }

    fn conditional_evaluator(&self, coord: usize, point: &[f64]) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync + '_>> {
        let d = &self.data;
        let n = d.n_obs();
        // residuals with coordinate `coord` removed from the fit
        let (mut s_rr, mut s_rc, mut s_cc) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let row = d.row(i);
            let c = if coord == 0 { 1.0 } else { row[coord - 1] };
            let fit = point[0] + row.iter().zip(&point[1..]).map(|(z, b)| z * b).sum::<f64>();
            let r = d.response()[i] - fit + c * point[coord];
            s_rr += r * r;
            s_rc += r * c;
            s_cc += c * c;
        }
        let pen_rest: f64 = point[1..]
            .iter()
            .enumerate()
            .filter(|(j, _)| j + 1 != coord)
            .map(|(_, &b)| self.penalty(b))
            .sum();
        let scale = 1.0 / (2.0 * n as f64);
        Some(Box::new(move |z: f64| {
            let rss = (s_rr - 2.0 * z * s_rc + z * z * s_cc).max(0.0);
            let pen = if coord == 0 { 0.0 } else { self.penalty(z) };
            -(rss * scale + pen + pen_rest)
        }))
    }
}

/// Funnel: `x_D ~ N(0, sigma^2)`, `x_i | x_D ~ N(mu, e^{x_D})` for `i < D`.
struct Funnel {
    sigma: f64,
    mu: f64,
}

impl KernelFn for Funnel {
    fn log_eval(&self, x: &[f64]) -> f64 {
        let d = x.len();
        let v = x[d - 1];
        let half_ln_2pi = 0.5 * (2.0 * PI).ln();
        let mut lp = -v * v / (2.0 * self.sigma * self.sigma) - half_ln_2pi - self.sigma.ln();
        let inv_var = (-v).exp();
        for &xi in &x[..d - 1] {
            let dev2 = (xi - self.mu) * (xi - self.mu);
            let quad = if dev2 == 0.0 { 0.0 } else { 0.5 * dev2 * inv_var };
            lp += -half_ln_2pi - 0.5 * v - quad;
        }
        lp
    }
}

struct HybridRosenbrock {
    a: f64,
    b: f64,
}

impl KernelFn for HybridRosenbrock {
    fn log_eval(&self, x: &[f64]) -> f64 {
        let (x1, x2) = (x[0], x[1]);
        let r = x2 - x1 * x1;
        -0.5 * PI.ln() - (x1 - self.a).powi(2) + 0.5 * (self.b / PI).ln() - self.b * r * r
    }
}

/// `N(z(x); 0, diag(5, 1/2, .., 1/2))` with `z_1 = x_1`,
/// `z_{2:D} = x_{2:D} + sin(a x_1)`; the shear has unit Jacobian.
struct Squiggle {
    a: f64,
}

impl KernelFn for Squiggle {
    fn log_eval(&self, x: &[f64]) -> f64 {
        let half_ln_2pi = 0.5 * (2.0 * PI).ln();
        let s = (self.a * x[0]).sin();
        let mut lp = -x[0] * x[0] / 10.0 - half_ln_2pi - 0.5 * 5f64.ln();
        for &xi in &x[1..] {
            let z = xi + s;
            lp += -z * z - half_ln_2pi - 0.5 * 0.5f64.ln();
        }
        lp
    }
}

/// Allen–Cahn path energy with `x_0 = x_{D+1} = 0`, `ds = 1/D`, `b = 1/a`.
struct AllenCahn {
    beta: f64,
    a: f64,
    ds: f64,
}

impl KernelFn for AllenCahn {
    fn log_eval(&self, x: &[f64]) -> f64 {
        let b = 1.0 / self.a;
        let mut grad = 0.0;
        let mut prev = 0.0;
        for &xi in x.iter().chain(std::iter::once(&0.0)) {
            grad += (xi - prev) * (xi - prev);
            prev = xi;
        }
        let well: f64 = x.iter().map(|v| (1.0 - v * v).powi(2)).sum();
        -self.beta * (self.a / (2.0 * self.ds) * grad + b * self.ds / 4.0 * well)
    }
}

struct StdNormal;

impl KernelFn for StdNormal {
    fn log_eval(&self, x: &[f64]) -> f64 {
        -0.5 * x.iter().map(|v| v * v).sum::<f64>()
    }
}

struct Indicator {
    lo: f64,
    hi: f64,
}

impl KernelFn for Indicator {
    fn log_eval(&self, x: &[f64]) -> f64 {
        if x[0] > self.lo && x[0] < self.hi {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }
}
