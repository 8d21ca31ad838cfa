//! Lie bracket, exterior derivative, interior product, Lie derivative and
//! pullbacks, all computed symbolically on component expressions.

use super::chart::Chart;
use super::expr::Expr;
use super::fields::{OneForm, ScalarField, SmoothMap, ThreeForm, TwoForm, VectorField};
use crate::error::{Error, Result};

/// `[X,Y]^i = Σ_j (X^j ∂_j Y^i − Y^j ∂_j X^i)`.
pub fn lie_bracket_vf(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    x.chart().ensure_same(y.chart())?;
    let comps = x
        .comps()
        .iter()
        .zip(y.comps())
        .map(|(xi, yi)| x.apply(yi).sub(&y.apply(xi)))
        .collect();
    VectorField::new(x.chart().clone(), comps)
}

pub fn d_function(chart: &Chart, f: &Expr) -> OneForm {
    let comps = (0..chart.dim()).map(|i| f.diff(i)).collect();
    OneForm::new(chart.clone(), comps).expect("one component per coordinate")
}

/// `(dα)_ij = ∂_i α_j − ∂_j α_i`.
pub fn d_one_form(alpha: &OneForm) -> TwoForm {
    let a = alpha.comps();
    TwoForm::from_fn(alpha.chart().clone(), |i, j| a[j].diff(i).sub(&a[i].diff(j)))
}

/// `(dω)_ijk = ∂_i ω_jk − ∂_j ω_ik + ∂_k ω_ij`.
pub fn d_two_form(omega: &TwoForm) -> ThreeForm {
    ThreeForm::from_fn(omega.chart().clone(), |i, j, k| {
        omega
            .get(j, k)
            .diff(i)
            .sub(&omega.get(i, k).diff(j))
            .add(&omega.get(i, j).diff(k))
    })
}

pub fn interior_one_form(x: &VectorField, alpha: &OneForm) -> Result<Expr> {
    alpha.pair(x)
}

/// `(i_X ω)_j = Σ_i X^i ω_ij`.
pub fn interior_two_form(x: &VectorField, omega: &TwoForm) -> Result<OneForm> {
    x.chart().ensure_same(omega.chart())?;
    let n = x.chart().dim();
    let comps = (0..n)
        .map(|j| {
            let parts: Vec<Expr> = (0..n)
                .filter(|&i| i != j && !x.comps()[i].is_zero())
                .map(|i| x.comps()[i].mul(&omega.get(i, j)))
                .collect();
            Expr::sum(parts.iter())
        })
        .collect();
    OneForm::new(x.chart().clone(), comps)
}

/// `(i_X ω)_jk = Σ_i X^i ω_ijk`.
pub fn interior_three_form(x: &VectorField, omega: &ThreeForm) -> Result<TwoForm> {
    x.chart().ensure_same(omega.chart())?;
    let n = x.chart().dim();
    Ok(TwoForm::from_fn(x.chart().clone(), |j, k| {
        let parts: Vec<Expr> = (0..n)
            .filter(|&i| !x.comps()[i].is_zero())
            .map(|i| x.comps()[i].mul(&omega.get(i, j, k)))
            .collect();
        Expr::sum(parts.iter())
    }))
}

/// `ℒ_X α = d(i_X α) + i_X dα`.
pub fn lie_derivative_one_form(x: &VectorField, alpha: &OneForm) -> Result<OneForm> {
    x.chart().ensure_same(alpha.chart())?;
    let exact = d_function(x.chart(), &alpha.pair(x)?);
    exact.add(&interior_two_form(x, &d_one_form(alpha))?)
}

/// `ℒ_X ω = d(i_X ω) + i_X dω`.
pub fn lie_derivative_two_form(x: &VectorField, omega: &TwoForm) -> Result<TwoForm> {
    let exact = d_one_form(&interior_two_form(x, omega)?);
    exact.add(&interior_three_form(x, &d_two_form(omega))?)
}

/// A differential form of degree 0 to 3.
#[derive(Debug, Clone, PartialEq)]
pub enum Form {
    Scalar(ScalarField),
    One(OneForm),
    Two(TwoForm),
    Three(ThreeForm),
}

impl Form {
    pub fn degree(&self) -> usize {
        match self {
            Form::Scalar(_) => 0,
            Form::One(_) => 1,
            Form::Two(_) => 2,
            Form::Three(_) => 3,
        }
    }

    pub fn chart(&self) -> &Chart {
        match self {
            Form::Scalar(f) => f.chart(),
            Form::One(f) => f.chart(),
            Form::Two(f) => f.chart(),
            Form::Three(f) => f.chart(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum CartanOp<'a> {
    ExteriorD,
    Interior(&'a VectorField),
    LieDerivative(&'a VectorField),
}

/// Applies a Cartan operation, rejecting forms of an unsupported degree.
pub fn cartan(op: CartanOp<'_>, form: &Form) -> Result<Form> {
    let mismatch = |what: &str| {
        Err(Error::DegreeMismatch(format!(
            "{what} is not defined on forms of degree {}",
            form.degree()
        )))
    };
    match (op, form) {
        (CartanOp::ExteriorD, Form::Scalar(f)) => Ok(Form::One(f.differential())),
        (CartanOp::ExteriorD, Form::One(a)) => Ok(Form::Two(d_one_form(a))),
        (CartanOp::ExteriorD, Form::Two(w)) => Ok(Form::Three(d_two_form(w))),
        (CartanOp::ExteriorD, Form::Three(_)) => mismatch("d"),
        (CartanOp::Interior(_), Form::Scalar(_)) => mismatch("interior product"),
        (CartanOp::Interior(x), Form::One(a)) => Ok(Form::Scalar(ScalarField::new(
            a.chart().clone(),
            interior_one_form(x, a)?,
        )?)),
        (CartanOp::Interior(x), Form::Two(w)) => Ok(Form::One(interior_two_form(x, w)?)),
        (CartanOp::Interior(x), Form::Three(w)) => Ok(Form::Two(interior_three_form(x, w)?)),
        (CartanOp::LieDerivative(x), Form::Scalar(f)) => {
            x.chart().ensure_same(f.chart())?;
            Ok(Form::Scalar(ScalarField::new(f.chart().clone(), x.apply(f.expr()))?))
        }
        (CartanOp::LieDerivative(x), Form::One(a)) => Ok(Form::One(lie_derivative_one_form(x, a)?)),
        (CartanOp::LieDerivative(x), Form::Two(w)) => Ok(Form::Two(lie_derivative_two_form(x, w)?)),
        (CartanOp::LieDerivative(_), Form::Three(_)) => mismatch("Lie derivative"),
    }
}

/// `F*f = f ∘ F`.
pub fn pullback_function(map: &SmoothMap, f: &ScalarField) -> Result<ScalarField> {
    map.target().ensure_same(f.chart())?;
    ScalarField::new(map.source().clone(), map.pull(f.expr())?)
}

/// `(F*α)_i = Σ_a (α_a ∘ F) ∂_i F^a`.
pub fn pullback_one_form(map: &SmoothMap, alpha: &OneForm) -> Result<OneForm> {
    map.target().ensure_same(alpha.chart())?;
    let jac = map.jacobian();
    let pulled = alpha.comps().iter().map(|c| map.pull(c)).collect::<Result<Vec<_>>>()?;
    let comps = (0..map.source().dim())
        .map(|i| {
            let parts: Vec<Expr> = pulled
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(a, c)| c.mul(&jac[a][i]))
                .collect();
            Expr::sum(parts.iter())
        })
        .collect();
    OneForm::new(map.source().clone(), comps)
}

/// `(F*ω)_ij = Σ_{a,b} (ω_ab ∘ F) ∂_i F^a ∂_j F^b`.
pub fn pullback_two_form(map: &SmoothMap, omega: &TwoForm) -> Result<TwoForm> {
    map.target().ensure_same(omega.chart())?;
    let jac = map.jacobian();
    let m = map.target().dim();
    let mut pulled = vec![vec![Expr::zero(); m]; m];
    for a in 0..m {
        for b in a + 1..m {
            let v = map.pull(&omega.get(a, b))?;
            pulled[b][a] = v.neg();
            pulled[a][b] = v;
        }
    }
    Ok(TwoForm::from_fn(map.source().clone(), |i, j| {
        let mut parts = Vec::new();
        for a in 0..m {
            for b in 0..m {
                if !pulled[a][b].is_zero() {
                    parts.push(pulled[a][b].mul(&jac[a][i]).mul(&jac[b][j]));
                }
            }
        }
        Expr::sum(parts.iter())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::chart::ChartDomain;
    use crate::calculus::parse::parse_expr;

    fn chart(n: usize) -> Chart {
        ChartDomain::cube(format!("R{n}"), n, -1.0, 1.0).unwrap()
    }

    fn vf(c: &Chart, comps: &[&str]) -> VectorField {
        let e = comps.iter().map(|s| parse_expr(s, c.dim()).unwrap()).collect();
        VectorField::new(c.clone(), e).unwrap()
    }

    fn form(c: &Chart, comps: &[&str]) -> OneForm {
        let e = comps.iter().map(|s| parse_expr(s, c.dim()).unwrap()).collect();
        OneForm::new(c.clone(), e).unwrap()
    }

    #[test]
    fn bracket_examples() {
        let c = chart(2);
        let dx = VectorField::coordinate(c.clone(), 0);
        let dy = VectorField::coordinate(c.clone(), 1);
        assert!(lie_bracket_vf(&dx, &dy).unwrap().is_zero());
        // [−x ∂y, x ∂x] = x ∂y
        let b = lie_bracket_vf(&vf(&c, &["0", "-x1"]), &vf(&c, &["x1", "0"])).unwrap();
        assert_eq!(b, vf(&c, &["0", "x1"]));
        let x = vf(&c, &["x1*x2", "sin(x1)"]);
        assert!(lie_bracket_vf(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn cartan_examples() {
        let c = chart(2);
        let f = ScalarField::parse(c.clone(), "x1*x2").unwrap();
        assert_eq!(f.differential(), form(&c, &["x2", "x1"]));
        let lie = lie_derivative_one_form(&VectorField::coordinate(c.clone(), 0), &form(&c, &["0", "x1"])).unwrap();
        assert_eq!(lie, form(&c, &["0", "1"]));

        let c3 = chart(3);
        let w = TwoForm::new(c3.clone(), vec![Expr::var(2), Expr::zero(), Expr::zero()]).unwrap();
        assert!(interior_two_form(&VectorField::coordinate(c3.clone(), 2), &w)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn degree_mismatch() {
        let c = chart(2);
        let f = Form::Scalar(ScalarField::parse(c.clone(), "x1").unwrap());
        let x = VectorField::coordinate(c, 0);
        assert!(matches!(
            cartan(CartanOp::Interior(&x), &f),
            Err(Error::DegreeMismatch(_))
        ));
    }

    #[test]
    fn pullback_examples() {
        let r1 = chart(1);
        let r2 = chart(2);
        let f = SmoothMap::new(r1.clone(), r2.clone(), vec![Expr::zero(), Expr::var(0).neg()]).unwrap();
        let dy = OneForm::coordinate(r2.clone(), 1);
        assert_eq!(pullback_one_form(&f, &dy).unwrap(), form(&r1, &["-1"]));

        let r4 = chart(4);
        let pr1 = SmoothMap::new(r4.clone(), r2.clone(), vec![Expr::var(0), Expr::var(1)]).unwrap();
        let pulled = pullback_one_form(&pr1, &OneForm::coordinate(r2.clone(), 0)).unwrap();
        assert_eq!(pulled, OneForm::coordinate(r4, 0));

        let id = SmoothMap::identity(r2);
        let v = nalgebra::DVector::from_vec(vec![0.3, -2.0]);
        assert_eq!(id.pushforward_at(&[0.1, 0.2], &v).unwrap(), v);
    }

    #[test]
    fn pullback_commutes_with_d() {
        let r2 = chart(2);
        let r3 = chart(3);
        let map = SmoothMap::new(
            r2.clone(),
            r3.clone(),
            vec![
                parse_expr("x1*x2", 2).unwrap(),
                parse_expr("sin(x1)", 2).unwrap(),
                parse_expr("x2^2 - x1", 2).unwrap(),
            ],
        )
        .unwrap();
        let alpha = form(&r3, &["x3*x2", "exp(x1)", "x1^2"]);
        let lhs = d_one_form(&pullback_one_form(&map, &alpha).unwrap());
        let rhs = pullback_two_form(&map, &d_one_form(&alpha)).unwrap();
        for p in r2.samples(16, 3) {
            let diff = lhs.eval(&p).unwrap() - rhs.eval(&p).unwrap();
            assert!(diff.amax() < 1e-12);
        }
    }

    mod properties {
        use super::*;
        use crate::calculus::strategies::{cube, one_form, smooth, vector_field};
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn d_squared_vanishes(f in smooth(3), alpha in one_form(3, 3)) {
                let c = cube(3);
                prop_assert!(d_one_form(&d_function(&c, &f)).is_zero());
                let dd = d_two_form(&d_one_form(&alpha));
                prop_assert!(dd.is_zero());
                for p in c.samples(64, 0) {
                    prop_assert!(dd.eval_max_abs(&p).unwrap() < 1e-12);
                }
            }

            #[test]
            fn bracket_antisymmetric(x in vector_field(3, 3), y in vector_field(3, 3)) {
                let xy = lie_bracket_vf(&x, &y).unwrap();
                let yx = lie_bracket_vf(&y, &x).unwrap();
                prop_assert!(xy.add(&yx).unwrap().is_zero());
            }

            #[test]
            fn bracket_jacobi(x in vector_field(3, 3), y in vector_field(3, 3), z in vector_field(3, 3)) {
                let b = |u: &VectorField, v: &VectorField| lie_bracket_vf(u, v).unwrap();
                let sum = b(&b(&x, &y), &z).add(&b(&b(&y, &z), &x)).unwrap().add(&b(&b(&z, &x), &y)).unwrap();
                for p in cube(3).samples(16, 1) {
                    prop_assert!(sum.eval(&p).unwrap().amax() < 1e-9);
                }
            }

            #[test]
            fn cartan_magic_formula_on_functions(x in vector_field(2, 2), f in smooth(2)) {
                let c = cube(2);
                let lhs = lie_derivative_one_form(&x, &d_function(&c, &f)).unwrap();
                let rhs = d_function(&c, &x.apply(&f));
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
