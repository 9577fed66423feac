//! Spectral solver for Dirac problems whose scalar, pseudoscalar and
//! electric potentials share one profile.
//!
//! The crate is `no_std` (with `alloc`). Layout:
//!
//! - [`model`]: couplings, shapes, problem descriptions.
//! - [`factorize`]: mixing matrix, ladder coefficients, superpotential.
//! - [`susy`]: case detection, shape invariance, level solving, eigenfunctions.
//! - [`catalog`]: closed-form spectra and stability predicates.
//! - [`oracle`]: staggered-grid diagonalization and shooting, used as ground truth.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod catalog;
pub mod error;
pub mod factorize;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod susy;

pub use error::{Error, Result};
