//! Multiplicative functions, Dirichlet characters, correlation sums, sieve
//! densities and the closed forms relating them, each paired with a direct
//! brute-force evaluation.

pub mod arith;
pub mod characters;
pub mod closedform;
pub mod correlations;
pub mod cyclo;
pub mod density;
pub mod discrepancy;
pub mod error;
pub mod explab;
pub mod fixtures;
pub mod multfun;
pub mod pretentious;
pub mod sum;
pub mod unit;

pub use error::{Error, Result};
