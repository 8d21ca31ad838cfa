// NaN must fail tolerance comparisons, and index loops mirror component formulas.
// `Expr` arithmetic methods take references rather than operands.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::should_implement_trait
)]

pub mod action;
pub mod algebroid;
pub mod apath;
pub mod calculus;
pub mod dirac;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod ode;
pub mod report;
pub mod scenario;

pub use error::{Error, Result};
