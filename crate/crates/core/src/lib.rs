//! Index calculus, lattice-path partitions, ellipsoid spectra and surface-map
//! checks for embedded contact homology computations.

pub mod cli;
pub mod curves;
pub mod dynamics;
pub mod ellipsoid;
pub mod error;
pub mod homology;
pub mod index;
pub mod orbit;
pub mod partitions;
pub mod scalar;
pub mod search;
pub mod selftest;

pub use error::{EchError, Result};
pub use scalar::RealScalar;
