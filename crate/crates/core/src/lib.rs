//! Lognormal random-field PDE solver with circulant-embedding sampling and
//! randomly shifted lattice rules.

pub mod covariance;
pub mod embedding;
pub mod error;
pub mod estimators;
pub mod fem;
pub mod lattice;
pub mod rng;

mod quadrature;
mod special;

pub use error::{Error, Result};
