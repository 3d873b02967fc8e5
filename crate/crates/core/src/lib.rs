//! Generalized APP message passing.
//!
//! * [`energy`]: pairwise energy models, belief tables, the model file format.
//! * [`discrete`]: the synchronous APP update with power `alpha` and
//!   smoothing `beta`, plus an exhaustive oracle.
//! * [`continuum`]: the same update on a 1D grid with a Gaussian smoothing
//!   kernel, relaxing to stationary Schrödinger/Hartree states.
//! * [`ldpc`]: parity-check codes, channels, sum-product and generalized APP
//!   decoders, Monte Carlo error rates.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod continuum;
pub mod discrete;
pub mod energy;
pub mod error;
pub mod ldpc;
pub mod stats;

pub use error::{Error, Result};

#[cfg(test)]
mod properties;
