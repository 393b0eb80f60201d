//! Numerical laboratory for the viscous Hamilton-Jacobi equation
//! `u_t - u_xx = a |u_x|^p` on an interval with homogeneous Dirichlet data.

// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod data;
pub mod domain;
pub mod error;
pub mod exact;
pub mod heat;
pub mod solver;
pub mod spectral;
mod tridiag;
pub mod verify;

#[cfg(test)]
mod proptests;

pub use error::{HjError, Result};
