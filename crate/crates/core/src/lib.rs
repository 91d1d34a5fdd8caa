//! Spectral counting functions, Riesz means and band-limited smoothings of
//! Laplace spectra, with asymptotic predictions from integrated heat
//! invariants and a completeness audit for computed eigenvalue lists.
//!
//! The crate works with frequencies `λ = √E` throughout. A [`Spectrum`] is
//! an immutable list of frequencies with multiplicities that is asserted to
//! be complete below its `lambda_max`; every query beyond that bound is an
//! error.
//!
//! - [`models`]: exact spectra of flat tori and round spheres.
//! - [`counting`]: `N(λ)` and the Riesz means `R_k N(λ)`, plus independent oracles.
//! - [`mollify`]: band-limited kernels and the smoothed counting functions.
//! - [`weyl`]: integrated expansion coefficients and asymptotic predictions.
//! - [`wavetrace`]: windowed wave traces and length-spectrum peaks.
//! - [`audit`]: detection of missing or spurious eigenvalues.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod counting;
pub mod error;
pub mod grid;
pub mod models;
pub mod mollify;
pub mod output;
pub mod spectrum;
pub mod sum;
pub mod wavetrace;
pub mod weyl;

pub use error::{Error, Result};
pub use grid::Grid;
pub use spectrum::{Entry, Perturbation, Spectrum};
