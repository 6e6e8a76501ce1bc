//! Matrix spectral factorization on the N-torus.
//!
//! Given a positive definite d×d matrix function `S` sampled on a grid of
//! `T^N`, [`driver::full_factor`] computes an outer-type factor `S₊` of
//! analytic type with respect to the half-plane order, `S = S₊ S₊*`.

pub mod driver;
pub mod error;
pub mod granger;
pub mod harmonic;
pub mod io;
pub mod jl_step;
pub mod random;
pub mod scalar;

pub use error::{Error, Result};
