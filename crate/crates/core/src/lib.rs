#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod agac;
pub mod env;
pub mod harness;
pub mod nn;
pub mod rollout;
pub mod tabular;
