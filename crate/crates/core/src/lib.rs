//! Numerical potential theory on compact subsets of the real line given as
//! finite unions of closed intervals ("band sets").
//!
//! The crate provides:
//!
//! - [`bandset`]: validated band sets, gaps, divisors, Möbius inversion and a
//!   sampled homogeneity verifier;
//! - [`quadrature`]: Gauss–Chebyshev and endpoint-substituted Gauss–Legendre
//!   rules for integrands with inverse-square-root endpoint singularities,
//!   plus a principal-value Cauchy integral evaluator;
//! - [`potential`]: equilibrium measure, Green's function with pole at
//!   infinity, its critical points, the Widom sum, and harmonic measure at
//!   arbitrary real poles via Möbius reduction;
//! - [`reflectionless`]: the divisor-parameterized function
//!   `R(z) = -Π(z - x_j) / √(Π(z - e))` on a band set, its boundary density
//!   and measure, the exponential (g-function) representation, Herglotz
//!   checks, and the endpoint point-mass criterion;
//! - [`pointmass`]: an inductive builder for a band set accumulating at 0
//!   whose divisor measure carries a point mass there while the Widom sum
//!   stays summable;
//! - [`singular`]: a multiscale builder that repeatedly splits the dominant
//!   band's mass into two nearly equal parts, driving the measure toward a
//!   singular continuous profile.
//!
//! All computations are in `f64`. The crate is `no_std`-compatible (it needs
//! `alloc`); enable the `libm` feature to build without `std`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("widomlab-core requires either the `std` or the `libm` feature");

pub(crate) mod float;

pub mod bandset;
pub mod error;
pub mod pointmass;
pub mod potential;
pub mod quadrature;
pub mod reflectionless;
pub mod singular;

pub use bandset::{ArcSelection, BandSet, Divisor, Interval};
pub use error::{Error, Result};

pub use quadrature::{Quadrature, QuadratureSpec};

