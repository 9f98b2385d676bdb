#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod combinatorics;
pub mod compact;
pub mod error;
pub mod format;
pub mod functionals;
pub mod geometry;
pub mod holgrim;
pub mod jets;
mod linalg;
pub mod problems;
pub mod recombination;
