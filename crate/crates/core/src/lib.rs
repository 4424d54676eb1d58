// `!(x > 0.0)` style guards reject NaN parameters on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod besov;
pub mod error;
pub mod idlaw;
pub mod lwnf;
pub mod moments;
pub mod numeric;
pub mod phase;
pub mod rng;
pub mod sampler;
mod serde_ext;
pub mod wavelet;

pub use error::{Error, Result};
