#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod clause;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod lp;
pub mod rule;
pub mod twolevel;

pub use error::{Error, Result};
