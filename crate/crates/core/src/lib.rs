//! Generalized intensity-dependent, non-resonant Jaynes-Cummings model for
//! shape-invariant field systems: dressed spectra, closed-form evolution,
//! population inversion and exact-diagonalization cross-checks.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod inversion;
pub mod linalg;
pub mod oracle;
pub mod par;
pub mod spectrum;

pub use error::{Error, Result};
