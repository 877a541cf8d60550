//! Credit and liquidity term-structure analytics on a two-factor affine jump
//! diffusion for the recovery rate `S_t = exp(-X_t)`.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod affine;
pub mod calibration;
pub mod curve;
pub mod error;
pub mod ode;
pub mod products;
pub mod recovery;
pub mod riccati;
mod special;

pub use error::{Error, Result};
