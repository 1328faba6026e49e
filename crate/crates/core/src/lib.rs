//! Simulation toolkit for a discrete oscillator medium: reciprocal-lattice
//! kinematics, harmonic-chain dynamics with normal-mode analysis, three-phonon
//! scattering and checks of the oscillator operator algebra.
//!
//! Data-parallel loops (event enumeration, Monte Carlo ensembles, batch
//! folding) run on rayon when the default `parallel` feature is enabled; each
//! has a `*_sequential` counterpart that is always available.

pub mod cli;
pub mod dispersion;
pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod quantum_bridge;
pub mod scattering;

pub use error::{Error, Result};
