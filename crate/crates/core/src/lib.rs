#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN
//! Computational spectral analysis of aperiodic order in one dimension.
//!
//! The crate covers two families of structures:
//!
//! * substitution subshifts over small alphabets, their sliding-block
//!   factors and the autocorrelation / diffraction of weighted Dirac combs
//!   supported on `Z` ([`subshift`], [`factors`], [`correlation`]);
//! * finite-local-complexity point sets on the line, their cluster locator
//!   factors and tent-smoothed combs ([`delone`]), with the silver-mean model
//!   set carried in exact `Z[√2]` arithmetic ([`modelset`]).
//!
//! [`spectral`] turns either kind of comb into spectral estimates: Bragg
//! intensities from exponential sums, atom detection over growing windows,
//! Fejér-smoothed spectral densities and convolution families of measures.
//! [`verify`] bundles the cross-checks between diffraction of factors and
//! spectral measures of the original system.

pub mod correlation;
pub mod delone;
pub mod error;
pub mod factors;
pub mod io;
pub mod modelset;
pub mod spectral;
pub mod subshift;
pub mod verify;

pub use error::{Error, Result};

pub use num_complex::Complex64;
