//! Stein's method for birth-death equilibrium laws, with stochastic-order
//! checks and explicit distributional approximation bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bdchain;
pub mod bounds;
pub mod distcore;
pub mod error;
pub mod exec;
pub mod models;
pub mod oracle;
pub mod orderings;

pub use error::{Error, Result};
pub use exec::Exec;
