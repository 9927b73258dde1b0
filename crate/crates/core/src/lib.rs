#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod classical_idos;
pub mod cli;
pub mod config;
pub mod error;
pub mod laplace;
pub mod potentials;
pub mod profile;
pub mod quad;
pub mod regvar;
pub mod roots;
pub mod special;
pub mod tails;
pub mod tauberian;

pub use error::{Error, Result};
