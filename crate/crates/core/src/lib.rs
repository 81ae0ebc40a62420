//! Numerical toolkit for classical and free entropy experiments.
//!
//! The crate works with probability laws on the real line carried either as
//! sampled densities on a uniform grid ([`GridDensity`]) or as purely atomic
//! laws ([`AtomicLaw`]). On top of these it provides
//!
//! * classical machinery: convolution, Gaussian heat flow, differential
//!   entropy, score functions, Fisher information and Hermite expansions
//!   ([`classical`]),
//! * free-probability machinery: Cauchy transforms, Stieltjes inversion,
//!   semicircular flow and free convolution powers via subordination fixed
//!   points, free entropy, conjugate variables and free Fisher information
//!   ([`free`]),
//! * a finite-dimensional commuting-projection inequality verifier
//!   ([`projection`]),
//! * entropy-sequence harnesses for monotonicity, equality detection,
//!   Fisher superadditivity, entropy convexity and free stability
//!   ([`harness`]),
//! * a projected-ascent solver for moment-constrained extremal densities
//!   ([`extremal`]).
//!
//! The crate is `no_std`-compatible (with `alloc`); disable the default
//! `std` feature for embedded or wasm targets.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod classical;
mod error;
pub mod extremal;
mod fft;
pub mod free;
pub mod grid;
pub mod harness;
mod linalg;
pub mod measures;
pub mod projection;

pub use error::{Error, Result};
pub use grid::Grid;
pub use measures::{AffineMap, AtomicLaw, GridDensity, Law, LawSpec, Metric};

/// 0.5 * log(2*pi*e), the entropy of the standard Gaussian and the free
/// entropy of the standard semicircle.
pub const HALF_LOG_TWO_PI_E: f64 = 1.4189385332046727;
