//! Numerics for Legendrian surfaces in the Heisenberg group H^2:
//! group operations, Hamiltonian vector fields, discretized surfaces,
//! varifold densities, and the sphere examples.

pub mod cutoff;
pub mod error;
pub mod field;
pub mod grid;
pub mod heisenberg;
pub mod plane;
pub mod sphere;
pub mod surface;
pub mod varifold;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
