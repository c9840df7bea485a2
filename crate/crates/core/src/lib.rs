//! Random coupling Ising models for three-dimensional color code
//! thresholds: lattice chain complexes, model compilation, parallel
//! tempering, observables, finite-size analysis and exact small-instance
//! oracles.

pub mod analysis;
pub mod campaign;
pub mod complex;
pub mod error;
pub mod gf2;
pub mod mc;
pub mod models;
pub mod observables;
pub mod oracle;

pub use error::{Error, Result};
