pub mod asg;
pub mod baseline;
pub mod diagnostics;
pub mod error;
pub mod kernels;
pub mod numerics;
pub mod posterior;
pub mod rng;
pub mod slice;
pub mod support;

pub use error::{Error, Result};
