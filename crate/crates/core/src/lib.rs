// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod fnn;
pub mod mixture;
pub mod numeric;
pub mod rd;
pub mod rng;

pub use error::{Error, Result};
