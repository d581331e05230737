//! Generating functional `Z(psi_i -> psi_e)` over Hilbert-space paths.
//!
//! - [`hilbert`]: states, Hamiltonians, spectral decomposition, propagators.
//! - [`functional`]: closed form of `Z` and its per-energy-mode factorization.
//! - [`lattice`]: time-sliced coherent-state path integral for `H = E a^dag a`.
//! - [`optimizer`]: maximization of `|Z|` over normalized final states.
//! - [`quantumness`]: path-level functional with a quantumness penalty.

pub mod error;
pub mod functional;
pub mod hilbert;
pub mod lattice;
pub mod optimizer;
pub mod quantumness;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
