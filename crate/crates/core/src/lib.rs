//! Radially symmetric compressible flow with density-dependent viscosity.

// comparisons are written negated so that NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod entropy;
pub mod eos;
pub mod error;
pub mod euler;
pub mod grid;
pub mod initdata;
pub mod io;
pub mod ladder;
pub mod profile;
pub mod quadrature;
pub mod solver;

pub use eos::{GasParams, ViscosityParams};
pub use error::{Error, Result};
pub use grid::{RadialField, RadialGrid};
