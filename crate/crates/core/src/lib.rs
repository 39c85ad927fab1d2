// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod kernel;
pub mod model;
pub mod montecarlo;
pub mod noise;
pub mod quadrature;
pub mod stats;
pub mod verify;
pub use error::{Error, Result};
