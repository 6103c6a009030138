//! File formats, batch runners and the `ybx` command line on top of `ybx-core`.

pub mod batch;
pub mod cli;
pub mod commands;
pub mod complex;
pub mod error;
pub mod netlist;
pub mod records;
pub mod sampling;
pub mod weightfile;

pub use error::YbxError;
