//! Coupled-channel wave-packet dynamics of a harmonically trapped two-level
//! ion driven by a standing-wave laser field, beyond the rotating-wave and
//! Lamb-Dicke approximations.
//!
//! The crate propagates a two-component (spinor) wavefunction on a uniform
//! spatial grid with a Chebyshev expansion of the time-evolution operator,
//! and provides the surrounding machinery: bare/diabatic/adiabatic basis
//! transforms, initial-state constructors, observables (inversion,
//! autocorrelation, entanglement entropy, total energy, Wigner
//! distributions), bound-state spectra and the time scales derived from
//! them, classical reference trajectories, a Jaynes-Cummings reference
//! model, and a small CLI for running preset scenarios.
//!
//! Everything is in atomic units (hbar = 1).

pub mod analysis;
pub mod basis;
pub mod cheb;
pub mod classical;
pub mod config;
pub mod dense;
pub mod error;
pub mod fft;
pub mod grid;
pub mod hamiltonian;
pub mod initial;
pub mod jc;
pub mod observables;
pub mod params;
pub mod run;
pub mod scan;
pub mod state;
pub mod wigner;

pub use error::SwionError;
pub use grid::GridSpec;
pub use params::IonTrapParams;
pub use state::{Basis, SpinorState};
