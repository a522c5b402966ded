#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bdf;
pub mod dirac;
pub mod error;
pub mod free_vacuum;
pub mod radial;
pub mod runner;
pub mod torus;

pub use error::{Error, Result};
