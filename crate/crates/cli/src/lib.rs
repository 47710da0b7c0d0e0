//! Command-line front end for `regprop`: scenario files, propagation runs,
//! state transition matrices and verification suites.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod elements;
pub mod error;
pub mod output;
pub mod propagate;
pub mod transition;
pub mod verify;

pub use error::{CliError, CliResult};
