//! Simulation and analysis toolkit for a two-crystal Sagnac source of
//! polarization-entangled photon pairs.
//!
//! The crate models the emitted two-qubit state as a function of pump
//! phase, spectral overlap, and noise ([`source`]), simulates Poissonian
//! coincidence counting through waveplate-based polarization analyzers
//! ([`analyzer`]), reconstructs density matrices from count sets by
//! maximum-likelihood tomography ([`tomography`]), and evaluates CHSH,
//! (2,3) Bell, and Leggett inequalities ([`inequalities`]).
//!
//! Conventions used throughout:
//!
//! * Two-qubit basis order `(HH, HV, VH, VV)`.
//! * Bloch sphere: `+z ↔ |H⟩`, `+x ↔ |+⟩ = (|H⟩+|V⟩)/√2`,
//!   `+y ↔ |R⟩ = (|H⟩+i|V⟩)/√2`.
//! * A measurement direction `n̂` means the projector `(I + n̂·σ)/2`.
//! * All randomness flows through explicit `u64` seeds; equal seeds give
//!   equal results on every platform.

pub mod analyzer;
pub mod error;
pub mod inequalities;
pub mod quantum;
pub mod rng;
pub mod source;
pub mod tomography;

pub use error::{Error, Result};
