//! Piecewise rank-constrained linear compression of sample ensembles.
//!
//! An ensemble of time-indexed random signals is given by sample matrices:
//! one m×q reference block `X(t)` and one n×q observation block `Y(t)` per
//! time stamp, columns being realizations. This crate fits a piecewise
//! affine transform `F` from a handful of anchor pairs, each interval
//! carrying a rank-constrained gain factored into an encoder/decoder pair,
//! so that applying `F` simultaneously filters, compresses and reconstructs
//! any signal of the ensemble. The reconstruction error at the anchor
//! stamps is available in closed form from the fitted singular spectra.
//!
//! The crate is `no_std`-compatible (with `alloc`); disable the default
//! `std` feature and enable `libm` for embedded use.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("pwrc-core requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod baseline;
pub mod covariance;
pub mod error;
pub mod linalg;
pub mod matrix;
mod scalar;
#[cfg(test)]
mod test_support;
pub mod transform;

pub use error::Error;
pub use matrix::Matrix;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
