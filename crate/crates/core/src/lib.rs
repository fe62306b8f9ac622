//! Waveguide quantum electrodynamics of ordered atomic arrays.
//!
//! Frequencies are detunings from the bare atomic resonance ω0, and rates are
//! expressed in whatever unit the caller picks for the guided-mode rate γ1D
//! (most examples use γ1D = 1). Geometry only enters through the optical
//! phases θ_m = ω0 z_m / c; the absolute scale ω0 appears only through the
//! ratio γ1D/ω0 where Bragg or retardation physics needs it.
//!
//! Modules:
//! - [`modes`]: effective non-Hermitian Hamiltonians, eigenmodes, Green's
//!   matrices, dispersion relations and band quantities.
//! - [`spectra1d`]: single-photon reflection/transmission by transfer
//!   matrices and Green's functions, Dicke and EIT limits, random filling.
//! - [`twophoton`]: two-photon scattering kernels, g²(τ), flux bookkeeping,
//!   two-excitation eigenstates.
//! - [`chiral`]: directional coupling and the exact N-atom chiral g²(0).
//! - [`lattice2d`]: square-lattice interaction constant and metasurface r/t.
//! - [`protocols`]: photon-scattering GHZ generation and state transfer.

pub mod chiral;
pub mod lattice2d;
pub mod modes;
pub mod polylog;
pub mod protocols;
pub mod spectra1d;
pub mod twophoton;

mod error;
mod limit;
mod linalg;
mod quad;

pub use error::{Error, Result};
pub use limit::Limit;

/// Complex double used throughout.
pub type C64 = num_complex::Complex64;

/// Library version, echoed into output headers by front ends.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[inline]
pub(crate) fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };
