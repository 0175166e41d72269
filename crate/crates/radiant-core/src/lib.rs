//! Collective spontaneous emission of coherent single-excitation atomic media.
//!
//! A cloud of `N` two-level atoms sharing a single excitation decays through
//! collective modes whose rates and frequency shifts are the eigenvalues of a
//! dense complex-symmetric coupling matrix built from the scalar-photon
//! exchange kernel. This crate computes those spectra for random finite
//! samples, evaluates the closed-form dispersion of the correlation-length
//! regularized unbounded medium, and cross-checks the two against each other
//! and against mode-counting identities.
//!
//! All rates are normalized to the isolated-atom decay rate, so an eigenvalue
//! `λ` decomposes as `Re λ` = decay rate and `Im λ` = collective shift.
//!
//! Module map:
//! - [`medium`]: physical parameters and reproducible random atom samples;
//! - [`kernel`]: the scalar-photon kernel and coupling-matrix assembly;
//! - [`spectra`]: dense eigendecomposition, mode classification, and the
//!   finite-sphere rate/count predictions;
//! - [`continuum`]: closed-form dispersion of the unbounded regularized
//!   medium, peak summaries, an independent quadrature transform, and
//!   mode-counting identities;
//! - [`dynamics`]: Rayleigh quotients of prepared states, the localized
//!   plane-wave experiment, and time-domain decay traces.

pub mod continuum;
pub mod dynamics;
pub mod kernel;
pub mod medium;
mod quadrature;
pub mod spectra;

pub use num_complex::Complex64;

/// Coarse failure classification used by front ends to map errors onto
/// process exit codes (validation vs numerical failure).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// Bad arguments, violated preconditions, regime errors.
    InvalidInput,
    /// A numerical procedure failed to meet its accuracy contract.
    Numerical,
}
