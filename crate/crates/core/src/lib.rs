//! Mean value inequalities for energy densities on gridded balls and half-balls,
//! with the Heinz scan and energy-quantization bubble detection.

// NaN-rejecting `!(x > 0.0)` guards and index loops over small fixed arrays are deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod calculus;
pub mod cli;
pub mod config;
pub mod constants;
pub mod grid;
pub mod heinz;
pub mod io;
pub mod quantization;
pub mod synth;
pub mod verify;

pub use error::{Error, Result};
