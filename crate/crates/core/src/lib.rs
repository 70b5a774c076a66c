#![no_std]
//! Numerics for barotropic Euler systems with a logarithmic equation of state.
//!
//! The crate is `no_std` (it needs `alloc`) and covers:
//!
//! * [`eos`]: the barotropic pressure family closed under the symmetrizing
//!   map, with derivatives and admissibility bounds;
//! * [`classical`]: the scalar change of variables that symmetrizes the
//!   classical isentropic Euler system, and a 1D method-of-lines harness that
//!   integrates both forms side by side;
//! * [`symmetrizer`]: the relativistic change of variables, its coefficient
//!   matrices, Jacobian and inverse;
//! * [`hydro`]: a 1D finite-volume solver for the relativistic Euler system.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classical;
pub mod eos;
pub mod error;
pub mod hydro;
pub mod numerics;
pub mod sampling;
pub mod symmetrizer;
pub mod tolerances;

pub use eos::{AdmissibleWindow, EosSpec, Family, PowerSum, PressureLaw};
pub use error::{Error, Result};
pub use numerics::linalg::QuadMatrix;
