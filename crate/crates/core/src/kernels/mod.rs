//! Unnormalized log-kernels and their one-dimensional conditionals.
//!
//! Every kernel is exposed in log space; `K(x)` itself is only ever formed
//! inside the support estimator. Points outside the support evaluate to
//! `f64::NEG_INFINITY`, never NaN.

mod builtin;
mod data;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::{Error, Result};

pub use builtin::{kernel_catalog, make_kernel, reference_kernel, resolve_kernel, KernelInfo, KERNEL_NAMES};
pub use data::{RegressionData, SyntheticData, SyntheticSpec};

/// Named real parameters of a kernel.
pub type Params = BTreeMap<String, f64>;

/// Evaluator behind a [`LogKernel`].
pub trait KernelFn: Send + Sync {
    /// `log K(x)`; `-inf` outside the support.
    fn log_eval(&self, x: &[f64]) -> f64;

    /// A specialized evaluator for the conditional in coordinate `coord`
    /// with the remaining coordinates taken from `point`. Kernels whose
    /// conditionals collapse to a cheap closed form (e.g. quadratic losses)
    /// override this; the result must agree with `log_eval` up to rounding.
    fn conditional_evaluator(
        &self,
        _coord: usize,
        _point: &[f64],
    ) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync + '_>> {
        None
    }
}

struct FnKernel<F>(F);

impl<F: Fn(&[f64]) -> f64 + Send + Sync> KernelFn for FnKernel<F> {
    fn log_eval(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

/// An unnormalized target `K: R^m -> [0, inf)`, held as `log K`.
#[derive(Clone)]
pub struct LogKernel {
    name: String,
    dim: usize,
    params: Params,
    inner: Arc<dyn KernelFn>,
}

impl fmt::Debug for LogKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LogKernel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("params", &self.params)
            .finish()
    }
}

impl LogKernel {
    pub fn new(name: impl Into<String>, dim: usize, params: Params, inner: Arc<dyn KernelFn>) -> Self {
        assert!(dim >= 1, "kernel dimension must be positive");
        Self {
            name: name.into(),
            dim,
            params,
            inner,
        }
    }

    /// Wraps a plain closure returning `log K(x)`.
    pub fn from_fn<F>(name: impl Into<String>, dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(name, dim, Params::new(), Arc::new(FnKernel(f)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    #[inline]
    pub fn log_eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let v = self.inner.log_eval(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }

    /// See [`KernelFn::conditional_evaluator`].
    pub fn conditional_evaluator(
        &self,
        coord: usize,
        point: &[f64],
    ) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync + '_>> {
        self.inner.conditional_evaluator(coord, point)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// A one-dimensional log-density `z -> log g(z)`.
pub trait LogDensity1D {
    fn log_density(&self, z: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + ?Sized> LogDensity1D for F {
    fn log_density(&self, z: f64) -> f64 {
        self(z)
    }
}

/// The conditional kernel `g(z) = K(x_1, .., x_{j-1}, z, x_{j+1}, .., x_m)`.
///
/// A view over the base kernel; only the conditioning values are stored.
#[derive(Clone)]
pub struct Conditional1D<'a> {
    kernel: &'a LogKernel,
    coord: usize,
    point: SmallVec<[f64; 16]>,
}

impl fmt::Debug for Conditional1D<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Conditional1D")
            .field("kernel", &self.kernel.name())
            .field("coord", &self.coord)
            .field("point", &self.point)
            .finish()
    }
}

impl<'a> Conditional1D<'a> {
    /// Conditional in coordinate `coord` (0-based) with the other `m - 1`
    /// coordinates given, in order, by `fixed`.
    pub fn new(kernel: &'a LogKernel, coord: usize, fixed: &[f64]) -> Result<Self> {
        let m = kernel.dim();
        if coord >= m {
            return Err(Error::InvalidArgument(format!(
                "coordinate {coord} out of range for a {m}-dimensional kernel"
            )));
        }
        if fixed.len() != m - 1 {
            return Err(Error::DimensionMismatch {
                expected: m - 1,
                got: fixed.len(),
            });
        }
        if let Some(bad) = fixed.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite conditioning value {bad}")));
        }
        let mut point: SmallVec<[f64; 16]> = SmallVec::with_capacity(m);
        point.extend_from_slice(&fixed[..coord]);
        point.push(0.0);
        point.extend_from_slice(&fixed[coord..]);
        Ok(Self { kernel, coord, point })
    }

    /// Conditional taken at a full point; `point[coord]` is ignored.
    pub fn at_point(kernel: &'a LogKernel, coord: usize, point: &[f64]) -> Self {
        debug_assert!(coord < kernel.dim() && point.len() == kernel.dim());
        Self {
            kernel,
            coord,
            point: SmallVec::from_slice(point),
        }
    }

    pub fn coord(&self) -> usize {
        self.coord
    }

    pub fn kernel(&self) -> &LogKernel {
        self.kernel
    }

    /// The full point with coordinate `coord` set to `z`.
    pub fn point_at(&self, z: f64) -> Vec<f64> {
        let mut p = self.point.to_vec();
        p[self.coord] = z;
        p
    }

    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        let mut p = self.point.clone();
        p[self.coord] = z;
        self.kernel.log_eval(&p)
    }
}

impl LogDensity1D for Conditional1D<'_> {
    fn log_density(&self, z: f64) -> f64 {
        self.eval(z)
    }
}

/// Convenience constructor mirroring [`Conditional1D::new`].
pub fn conditional_1d<'a>(kernel: &'a LogKernel, coord: usize, fixed: &[f64]) -> Result<Conditional1D<'a>> {
    Conditional1D::new(kernel, coord, fixed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosen() -> LogKernel {
        make_kernel("rosenbrock", &Params::new(), None).unwrap()
    }

    #[test]
    fn rosenbrock_conditional_substitutions() {
        let k = rosen();
        let g = conditional_1d(&k, 1, &[0.0]).unwrap();
        for z in [-1.3, 0.0, 0.4, 2.0] {
            let expected = -z * z / 10.0 - 2.0 * z * z;
            assert!((g.eval(z) - expected).abs() < 1e-14);
        }
        let g = conditional_1d(&k, 0, &[0.0]).unwrap();
        for z in [0.3, 1.1, 2.5] {
            assert_eq!(g.eval(z), g.eval(-z));
            assert!((g.eval(z) - (-z * z / 10.0 - 2.0 * z.powi(4))).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_conditional() {
        let mut p = Params::new();
        p.insert("dim".into(), 2.0);
        let k = make_kernel("radial_exp", &p, None).unwrap();
        let g = conditional_1d(&k, 0, &[3.0]).unwrap();
        assert_eq!(g.eval(0.0), -3.0);
        assert!((g.eval(4.0) + 5.0).abs() < 1e-15);
    }

    #[test]
    fn conditional_errors() {
        let k = rosen();
        assert!(conditional_1d(&k, 2, &[0.0]).is_err());
        assert!(conditional_1d(&k, 0, &[0.0, 1.0]).is_err());
        assert!(conditional_1d(&k, 0, &[f64::NAN]).is_err());
        assert!(conditional_1d(&k, 0, &[f64::INFINITY]).is_err());
    }

    #[test]
    fn nan_is_mapped_to_neg_infinity() {
        let k = LogKernel::from_fn("nan", 1, |_| f64::NAN);
        assert_eq!(k.log_eval(&[0.0]), f64::NEG_INFINITY);
    }
}
