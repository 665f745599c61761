//! Command-line front end for the `curvematch` library: curve file I/O,
//! experiment runs and SVG figures.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod io;
pub mod plot;

pub use commands::{exit_code, GenKind, RunConfig, EXIT_INPUT, EXIT_SOLVER};
