//! Interaction-energy minimization over discretized probability measures.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod field;
pub mod grid;
pub mod kernel;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
