//! One-shot distributed empirical risk minimization.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregate;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod gen;
pub mod harness;
pub mod linalg;
pub mod loss;
pub mod rng;
pub mod runtime;
pub mod solver;

pub use error::{Error, Result};
