//! Superspecial abelian varieties through their quaternionic hermitian
//! lattices: class sets, Brandt matrices, isogeny graphs and their spectra.

pub mod arith;
pub mod brandt;
pub mod error;
pub mod hermitian;
pub mod isogeny_graphs;
pub mod lattice;
pub mod quat_core;
pub mod spectra;

pub use error::{Error, Result};

/// Exact rationals with arbitrary-precision numerator and denominator.
pub type Rational = num_rational::BigRational;
