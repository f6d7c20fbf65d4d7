// Negated comparisons are deliberate: NaN must fail every validity check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fracops;
pub mod mlf;
pub mod spectral;
pub mod linsolve;
pub mod picard;
pub mod verify;
pub mod cli;
