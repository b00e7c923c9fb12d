#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coherent;
pub mod correspondence;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod models;

pub use error::{EqError, Result};
