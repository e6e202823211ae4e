//! Simulation and regularity diagnostics for the one-dimensional logarithmic
//! Schrödinger equation `i u_t + u_xx = λ u log|u|²`.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: symmetric uniform grids and complex fields,
//! * [`spectral`]: the discrete Laplacian, its exact diagonalisation and the
//!   linear propagator,
//! * [`solver`]: the guarded logarithmic phase flow and Strang splitting,
//! * [`functionals`]: mass, energy, discrete Sobolev norms, the averaging
//!   operator and the derivative-equation decomposition,
//! * [`toymodel`]: the Dirichlet operator `-Δ + λ log|χ|² + κ`,
//! * [`oracle`]: Gaussian reference solutions and the Picard–Duhamel solver,
//! * [`harness`]: scenarios, configuration, CSV/SVG output.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these guards

pub mod error;
pub mod functionals;
pub mod grid;
pub mod harness;
pub mod oracle;
pub mod solver;
pub mod spectral;
pub mod toymodel;

pub use error::{Error, Result};
pub use grid::{odd_defect, sample, sample_complex, BoundaryCondition, Field, Grid};
pub use num_complex::Complex64;
