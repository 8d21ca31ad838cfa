//! Proptest generators for polynomial and transcendental expressions.

use proptest::prelude::*;

use super::{Chart, ChartDomain, Expr, OneForm, VectorField};

/// Polynomials of degree ≤ `degree` in `dim` variables with small integer coefficients.
pub fn polynomial(dim: usize, degree: u32) -> impl Strategy<Value = Expr> {
    let monomial = proptest::collection::vec(0..=degree, dim)
        .prop_filter("degree bound", move |e| e.iter().sum::<u32>() <= degree);
    proptest::collection::vec((-3i64..=3, monomial), 1..=4).prop_map(|terms| {
        Expr::sum(
            terms
                .into_iter()
                .map(|(c, exps)| {
                    exps.iter().enumerate().fold(Expr::int(c), |acc, (i, &e)| {
                        acc.mul(&Expr::var(i).pow(e as i32).expect("small exponent"))
                    })
                })
                .collect::<Vec<_>>()
                .iter(),
        )
    })
}

/// Polynomials occasionally wrapped in `sin`, `cos` or `exp`.
pub fn smooth(dim: usize) -> impl Strategy<Value = Expr> {
    (polynomial(dim, 2), polynomial(dim, 1), 0..4u8).prop_map(|(p, q, k)| match k {
        0 => p,
        1 => p.add(&q.sin()),
        2 => p.mul(&q.cos()),
        _ => p.add(&q.exp()),
    })
}

pub fn cube(dim: usize) -> Chart {
    ChartDomain::cube(format!("R{dim}"), dim, -1.0, 1.0).expect("valid cube")
}

pub fn vector_field(dim: usize, degree: u32) -> impl Strategy<Value = VectorField> {
    proptest::collection::vec(polynomial(dim, degree), dim)
        .prop_map(move |c| VectorField::new(cube(dim), c).expect("matching chart"))
}

pub fn one_form(dim: usize, degree: u32) -> impl Strategy<Value = OneForm> {
    proptest::collection::vec(polynomial(dim, degree), dim)
        .prop_map(move |c| OneForm::new(cube(dim), c).expect("matching chart"))
}
