//! Ready-made instances used by tests, scenarios and documentation.
//!
//! The dual pair lives on `X = ℝ⁴` with coordinates `(x1, y1, x2, y2)`,
//! `Π_S = ∂x1∧∂y1 − ∂x2∧∂y2`, `J1 = (x1, y1)` and `J2 = (x2, y2)`; both
//! algebroids are the cotangent algebroid of `∂x1∧∂x2` on `ℝ²`.

use std::sync::Arc;

use crate::action::{ActionModel, MoritaWitness, Side};
use crate::algebroid::LieAlgebroidModel;
use crate::calculus::{Bivector, Chart, ChartDomain, Expr, SmoothMap};
use crate::error::Result;
use crate::report::CheckOptions;

pub fn dual_pair_charts() -> Result<(Chart, Chart)> {
    Ok((
        ChartDomain::cube("X", 4, -2.0, 2.0)?,
        ChartDomain::cube("M", 2, -2.0, 2.0)?,
    ))
}

/// `Π_S` on the dual-pair chart.
pub fn symplectic_bivector(x: &Chart) -> Result<Bivector> {
    Bivector::new(
        x.clone(),
        vec![
            Expr::one(),
            Expr::zero(),
            Expr::zero(),
            Expr::zero(),
            Expr::zero(),
            Expr::int(-1),
        ],
    )
}

pub fn planar_cotangent(label: &str, m: &Chart) -> Result<Arc<LieAlgebroidModel>> {
    let pi = Bivector::new(m.clone(), vec![Expr::one()])?;
    Ok(Arc::new(LieAlgebroidModel::cotangent(
        label,
        &pi,
        &CheckOptions::default(),
    )?))
}

pub fn dual_pair() -> Result<MoritaWitness> {
    let (x, m) = dual_pair_charts()?;
    let j1 = SmoothMap::new(x.clone(), m.clone(), vec![Expr::var(0), Expr::var(1)])?;
    let j2 = SmoothMap::new(x.clone(), m.clone(), vec![Expr::var(2), Expr::var(3)])?;
    MoritaWitness::from_dual_pair(
        &symplectic_bivector(&x)?,
        j1,
        j2,
        planar_cotangent("A1", &m)?,
        planar_cotangent("A2", &m)?,
    )
}

/// The opposite bimodule: left `A2` by `−ξ2` along `J2`, right `A1` by `−ξ1` along `J1`.
pub fn dual_pair_opposite(w: &MoritaWitness) -> Result<MoritaWitness> {
    let flip = |a: &ActionModel, side: Side| {
        ActionModel::new(
            a.algebroid().clone(),
            a.momentum().clone(),
            a.fields().iter().map(|f| f.neg()).collect(),
            side,
        )
    };
    MoritaWitness::new(flip(w.right(), Side::Left)?, flip(w.left(), Side::Right)?)
}
