//! Surrogate modelling and inverse design for picosecond-laser channel
//! machining.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod eval;
pub mod model;
pub mod cli;
pub mod error;
pub mod gbt;
pub mod generator;
pub mod inverse;
pub mod mlp;
pub mod regress;
pub mod service;
pub mod synthetic;

pub use error::{Error, Result};
