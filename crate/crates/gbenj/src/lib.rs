//! Pseudospectral simulator and analyticity diagnostics for the generalized
//! Benjamin equation
//!
//! ```text
//! u_t - l*H(u_xx) - u_xxx + u^p u_x = 0,    0 <= l < 1,  p >= 1,
//! ```
//!
//! on a large periodic box, where `H` is the Hilbert transform. The crate
//! provides
//!
//! - spectral transforms and the Fourier-multiplier operator zoo
//!   ([`spectral`], [`operators`]),
//! - exact-linear-part time integrators (IFRK4 / ETDRK4), the mollified
//!   scheme variant, and Petviashvili solitary-wave generation ([`solver`]),
//! - conserved quantities, Gevrey norms, windowed Bourgain norms, the
//!   Gevrey-flux identity, and the almost-conservation audit
//!   ([`diagnostics`]),
//! - radius-of-analyticity fits from spectral decay and the algebraic
//!   lower-bound audits ([`analyticity`]),
//! - a batch experiment harness with a flat config format, deterministic
//!   outputs, checkpoint/restart, sweeps, and plot-script emission
//!   ([`harness`]).
//!
//! See the crate examples for runnable end-to-end demonstrations of each
//! capability.

pub mod analyticity;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod operators;
pub mod solver;
pub mod spectral;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use operators::{GevreyIndex, ModelParams, MollifierSpec};
pub use solver::{SolverConfig, SolverState, Trajectory};
pub use spectral::{Grid, RealField, SpectralField};
