//! Symbolic scalar fields and Cartan calculus on box charts.

pub mod cartan;
pub mod chart;
pub mod expr;
pub mod fields;
pub mod parse;
pub mod solve;

pub use cartan::{cartan, lie_bracket_vf, CartanOp, Form};
pub use chart::{Chart, ChartDomain};
pub use expr::{Coeff, Expr};
pub use fields::{Bivector, OneForm, ScalarField, SmoothMap, ThreeForm, TwoForm, VectorField};
pub use parse::{parse_expr, parse_with_aliases};

#[cfg(test)]
pub(crate) mod strategies;
