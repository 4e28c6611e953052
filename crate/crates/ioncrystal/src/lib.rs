//! Numerical tools for two-dimensional triangular ion Coulomb crystals.
//!
//! The crate covers the harmonic lattice dynamics of a periodic crystal,
//! the parameters of a state-dependent pushing gate, the finite-temperature
//! gate fidelity limited by anharmonic coupling to in-plane phonons, and the
//! effective Ising couplings generated by a walking wave in an ion chain.
//!
//! All internal quantities are dimensionless. Crystal frequencies are in
//! units of the in-plane trap frequency, lengths in units of the lattice
//! spacing, and chain frequencies in units of the radial trap frequency.

pub mod cli;
pub mod constants;
pub mod decoherence;
pub mod error;
pub mod gate;
pub mod lattice;
pub mod phonons;
pub mod spinchain;
pub mod sum;

pub use error::{Error, Result};
