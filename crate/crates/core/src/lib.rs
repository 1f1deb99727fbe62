//! Rank-1 lattice cubature with SPOD weights for elliptic PDE
//! uncertainty quantification.
//!
//! The crate provides:
//!
//! - [`special`]: Stirling partition numbers, Bernoulli polynomials, the
//!   lattice kernel, and the Riemann zeta function.
//! - [`weights`]: smoothness-driven product-and-order-dependent (SPOD)
//!   cubature weights derived from the decay of the random-field
//!   fluctuations, plus the associated error-bound constants.
//! - [`cbc`]: component-by-component construction of rank-1 lattice
//!   generating vectors, with a direct reference path and a fast path
//!   using primitive-root reordering and FFT-based cyclic convolution.
//! - [`lattice`]: lattice point generation, equal-weight cubature, and
//!   worst-case-error evaluation by kernel and dual-lattice routes.
//! - [`field`]: periodic and affine random diffusion coefficients with
//!   exact low-order moments and ellipticity bounds.
//! - [`fem`]: piecewise-linear finite elements for the diffusion problem
//!   on the unit square.
//! - [`experiments`]: convergence-study drivers emitting CSV/JSON reports.

pub mod cbc;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod field;
pub mod lattice;
pub mod numeric;
pub mod special;
pub mod weights;

pub use error::{Error, Result};
