//! Numerical laboratory for gravity-driven Stokes internal waves.
//!
//! The crate is layered bottom-up:
//!
//! * [`spectral`]: periodic fields, the nonlocal operators `Λ⁻¹`, `H`, `Λ`
//!   as multipliers and as singular quadratures.
//! * [`quad`]: adaptive Gauss–Kronrod integration.
//! * [`stokeslet`]: the x₁-periodic Stokeslet, its gravity-reduced kernels
//!   and patch velocities.
//! * [`contour`]: interface dynamics in parametric and graph form, and the
//!   cubic expansion of the graph equation.
//! * [`models`]: the quadratic, cubic-local and cubic-nonlocal 1D models.
//! * [`timestepper`]: RK4 with error and CFL control and blow-up-aware
//!   termination.
//! * [`diagnostics`]: slope tracking, Riccati comparison, weighted
//!   functionals, decay and analyticity-strip fits.
//! * [`harness`]: experiment configs, records, threshold bisection and the
//!   verification batteries behind the CLI.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contour;
pub mod diagnostics;
pub mod harness;
pub mod models;
pub mod quad;
pub mod spectral;
pub mod stokeslet;
pub mod timestepper;

mod fit;
mod par;

pub use spectral::{Grid1D, PeriodicField};
