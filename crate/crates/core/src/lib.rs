//! Numerical core for checking Yang-Baxter and star-triangle relations.
//!
//! Everything here is allocation-based but IO-free, so the crate builds
//! without `std`. The companion `ybx` crate adds file formats and the CLI.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod convert;
pub mod gaussian;
mod linalg;
pub mod network;
pub mod operators;
pub mod report;
pub mod tensor;
pub mod verify;
pub mod weights;

pub use num_complex::Complex64;
pub use report::{estimate_scalar_factor, ResidualReport};
pub use tensor::{einsum, max_abs_diff, DenseTensor, TensorError};
pub use weights::Rapidity;
