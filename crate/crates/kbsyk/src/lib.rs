//! Real-time quench dynamics of dissipative SYK models.
//!
//! The crate prepares exact thermal SYK Green's functions by self-consistent
//! iteration in frequency space, propagates the two-time Kadanoff-Baym
//! equations for a system coupled to one or two SYK baths (or evolved under a
//! Lindbladian with linear jump operators), and extracts effective-temperature
//! trajectories, total energy, and Mpemba-crossing statistics from the
//! converged two-time Green's functions.
//!
//! Layout:
//! - [`grid`] — two-time lattice containers, Keldysh components, spectral slices
//! - [`equilibrium`] — thermal state preparation (Schwinger-Dyson fixed point)
//! - [`quench`] — bath-coupled Kadanoff-Baym evolution (whole-grid fixed point)
//! - [`lindblad`] — vectorized-Liouvillian Kadanoff-Baym evolution
//! - [`observables`] — effective temperatures, energy, crossing detection
//! - [`snapshot`] — binary/CSV persistence of two-time grids
//! - [`runner`] — scenario orchestration behind the `kbsyk` binary

pub mod equilibrium;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod lindblad;
pub mod observables;
pub mod quench;
pub mod runner;
pub mod snapshot;

pub use error::KbError;
pub use grid::{ContourGreen, KeldyshSlice, TimeLattice};

/// Result alias used across the solver.
pub type Result<T> = std::result::Result<T, KbError>;
