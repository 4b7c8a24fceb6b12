//! Numerical laboratory for operator monotonicity, operator convexity and the
//! intermediate positivity classes between them.

#![allow(clippy::needless_range_loop)]

pub mod classify;
pub mod cli;
pub mod divided;
pub mod error;
pub mod expr;
pub mod jets;
pub mod matrices;
pub mod mollify;
pub mod report;
pub mod repro;
pub mod scalar;
pub mod spectra;
pub mod witness;

pub use error::{Error, Result};
