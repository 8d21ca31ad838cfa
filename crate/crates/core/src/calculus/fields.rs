//! Tensor fields on a chart, stored as component expressions.
//!
//! Antisymmetric 2-tensors keep only the strict upper triangle, so
//! `ω_ji = −ω_ij` holds by construction; 3-forms keep `i < j < k`.

use nalgebra::{DMatrix, DVector};

use super::chart::Chart;
use super::expr::Expr;
use crate::error::{Error, Result};

fn check_len(what: &str, chart: &Chart, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::shape(format!(
            "{what} on `{}` needs {want} components, got {got}",
            chart.name()
        )))
    }
}

fn check_vars(chart: &Chart, exprs: &[Expr]) -> Result<()> {
    for e in exprs {
        if e.var_bound() > chart.dim() {
            return Err(Error::shape(format!(
                "component `{e}` uses variables beyond the {}-dimensional chart `{}`",
                chart.dim(),
                chart.name()
            )));
        }
    }
    Ok(())
}

pub(crate) fn eval_all(exprs: &[Expr], p: &[f64]) -> Result<Vec<f64>> {
    exprs.iter().map(|e| e.eval(p)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    chart: Chart,
    expr: Expr,
}

impl ScalarField {
    pub fn new(chart: Chart, expr: Expr) -> Result<Self> {
        check_vars(&chart, std::slice::from_ref(&expr))?;
        Ok(ScalarField { chart, expr })
    }

    pub fn parse(chart: Chart, src: &str) -> Result<Self> {
        let expr = super::parse::parse_expr(src, chart.dim())?;
        Ok(ScalarField { chart, expr })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// Value of the partial derivative with multi-index `order` at `point`.
    pub fn eval_and_derive(&self, point: &[f64], order: &[u32]) -> Result<f64> {
        if order.len() != self.chart.dim() {
            return Err(Error::shape(format!(
                "multi-index of length {} on a {}-dimensional chart",
                order.len(),
                self.chart.dim()
            )));
        }
        self.chart.ensure_contains(point)?;
        self.expr.derive(order).eval(point)
    }

    pub fn differential(&self) -> OneForm {
        OneForm {
            chart: self.chart.clone(),
            comps: (0..self.chart.dim()).map(|i| self.expr.diff(i)).collect(),
        }
    }
}

/// A vector field `Σ X^i ∂_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    chart: Chart,
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: Chart, comps: Vec<Expr>) -> Result<Self> {
        check_len("vector field", &chart, comps.len(), chart.dim())?;
        check_vars(&chart, &comps)?;
        Ok(VectorField { chart, comps })
    }

    pub fn zero(chart: Chart) -> Self {
        let comps = vec![Expr::zero(); chart.dim()];
        VectorField { chart, comps }
    }

    /// The coordinate field `∂_i` (zero-based `i`).
    pub fn coordinate(chart: Chart, i: usize) -> Self {
        let mut v = VectorField::zero(chart);
        v.comps[i] = Expr::one();
        v
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn into_comps(self) -> Vec<Expr> {
        self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    /// Derivation `X f = Σ X^j ∂_j f`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let parts: Vec<Expr> = self
            .comps
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| c.mul(&f.diff(j)))
            .collect();
        Expr::sum(parts.iter())
    }

    pub fn eval(&self, p: &[f64]) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(eval_all(&self.comps, p)?))
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        self.chart.ensure_same(&other.chart)?;
        Ok(self.zip(other, Expr::add))
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.chart.ensure_same(&other.chart)?;
        Ok(self.zip(other, Expr::sub))
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        self.map(|c| c.mul(f))
    }

    pub fn neg(&self) -> VectorField {
        self.map(Expr::neg)
    }

    fn map(&self, f: impl Fn(&Expr) -> Expr) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &VectorField, f: impl Fn(&Expr, &Expr) -> Expr) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect(),
        }
    }
}

/// A 1-form `Σ α_i dx_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    chart: Chart,
    comps: Vec<Expr>,
}

impl OneForm {
    pub fn new(chart: Chart, comps: Vec<Expr>) -> Result<Self> {
        check_len("1-form", &chart, comps.len(), chart.dim())?;
        check_vars(&chart, &comps)?;
        Ok(OneForm { chart, comps })
    }

    pub fn zero(chart: Chart) -> Self {
        let comps = vec![Expr::zero(); chart.dim()];
        OneForm { chart, comps }
    }

    /// The coordinate differential `dx_i` (zero-based `i`).
    pub fn coordinate(chart: Chart, i: usize) -> Self {
        let mut a = OneForm::zero(chart);
        a.comps[i] = Expr::one();
        a
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    /// `α(X)`.
    pub fn pair(&self, x: &VectorField) -> Result<Expr> {
        self.chart.ensure_same(x.chart())?;
        let parts: Vec<Expr> = self.comps.iter().zip(x.comps()).map(|(a, v)| a.mul(v)).collect();
        Ok(Expr::sum(parts.iter()))
    }

    pub fn eval(&self, p: &[f64]) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(eval_all(&self.comps, p)?))
    }

    pub fn add(&self, other: &OneForm) -> Result<OneForm> {
        self.chart.ensure_same(&other.chart)?;
        Ok(OneForm {
            chart: self.chart.clone(),
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn sub(&self, other: &OneForm) -> Result<OneForm> {
        self.add(&other.neg())
    }

    pub fn scale(&self, f: &Expr) -> OneForm {
        OneForm {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(|c| c.mul(f)).collect(),
        }
    }

    pub fn neg(&self) -> OneForm {
        OneForm {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(Expr::neg).collect(),
        }
    }
}

/// Index of `(i, j)`, `i < j < n`, in the packed strict upper triangle.
pub(crate) fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

fn upper_len(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Packed antisymmetric matrix of expressions.
#[derive(Debug, Clone, PartialEq)]
struct Antisym {
    n: usize,
    upper: Vec<Expr>,
}

impl Antisym {
    fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Expr) -> Self {
        let mut upper = Vec::with_capacity(upper_len(n));
        for i in 0..n {
            for j in i + 1..n {
                upper.push(f(i, j));
            }
        }
        Antisym { n, upper }
    }

    fn get(&self, i: usize, j: usize) -> Expr {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.upper[upper_index(self.n, i, j)].clone(),
            std::cmp::Ordering::Greater => self.upper[upper_index(self.n, j, i)].neg(),
            std::cmp::Ordering::Equal => Expr::zero(),
        }
    }

    fn eval(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in i + 1..self.n {
                let v = self.upper[upper_index(self.n, i, j)].eval(p)?;
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        Ok(m)
    }
}

macro_rules! antisym_field {
    ($name:ident, $what:literal) => {
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            chart: Chart,
            data: Antisym,
        }

        impl $name {
            /// Builds from the packed strict upper triangle, row by row.
            pub fn new(chart: Chart, upper: Vec<Expr>) -> Result<Self> {
                let n = chart.dim();
                check_len($what, &chart, upper.len(), upper_len(n))?;
                check_vars(&chart, &upper)?;
                Ok($name {
                    chart,
                    data: Antisym { n, upper },
                })
            }

            /// Builds from a function evaluated on `i < j`.
            pub fn from_fn(chart: Chart, f: impl FnMut(usize, usize) -> Expr) -> Self {
                let data = Antisym::from_fn(chart.dim(), f);
                $name { chart, data }
            }

            pub fn zero(chart: Chart) -> Self {
                $name::from_fn(chart, |_, _| Expr::zero())
            }

            pub fn chart(&self) -> &Chart {
                &self.chart
            }

            /// Component `(i, j)` for any pair, antisymmetry applied.
            pub fn get(&self, i: usize, j: usize) -> Expr {
                self.data.get(i, j)
            }

            pub fn upper(&self) -> &[Expr] {
                &self.data.upper
            }

            pub fn is_zero(&self) -> bool {
                self.data.upper.iter().all(Expr::is_zero)
            }

            pub fn eval(&self, p: &[f64]) -> Result<DMatrix<f64>> {
                self.data.eval(p)
            }

            pub fn add(&self, other: &$name) -> Result<$name> {
                self.chart.ensure_same(&other.chart)?;
                Ok($name::from_fn(self.chart.clone(), |i, j| {
                    self.get(i, j).add(&other.get(i, j))
                }))
            }

            pub fn scale(&self, f: &Expr) -> $name {
                $name::from_fn(self.chart.clone(), |i, j| self.get(i, j).mul(f))
            }

            pub fn neg(&self) -> $name {
                $name::from_fn(self.chart.clone(), |i, j| self.get(i, j).neg())
            }
        }
    };
}

antisym_field!(TwoForm, "2-form");
antisym_field!(Bivector, "bivector");

impl TwoForm {
    /// `ω(X, Y) = Σ_{i<j} ω_ij (X^i Y^j − X^j Y^i)`.
    pub fn apply(&self, x: &VectorField, y: &VectorField) -> Result<Expr> {
        self.chart.ensure_same(x.chart())?;
        self.chart.ensure_same(y.chart())?;
        let n = self.chart.dim();
        let mut parts = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let w = &self.data.upper[upper_index(n, i, j)];
                if w.is_zero() {
                    continue;
                }
                let a = x.comps()[i].mul(&y.comps()[j]).sub(&x.comps()[j].mul(&y.comps()[i]));
                parts.push(w.mul(&a));
            }
        }
        Ok(Expr::sum(parts.iter()))
    }
}

impl Bivector {
    /// `(Π♯α)^k = Σ_j Π_kj α_j`, so that `⟨β, Π♯α⟩ = Π(β, α)`.
    pub fn sharp(&self, alpha: &OneForm) -> Result<VectorField> {
        self.chart.ensure_same(alpha.chart())?;
        let n = self.chart.dim();
        let comps = (0..n)
            .map(|k| {
                let parts: Vec<Expr> = (0..n)
                    .filter(|&j| j != k && !alpha.comps()[j].is_zero())
                    .map(|j| self.get(k, j).mul(&alpha.comps()[j]))
                    .collect();
                Expr::sum(parts.iter())
            })
            .collect();
        Ok(VectorField {
            chart: self.chart.clone(),
            comps,
        })
    }

    /// `Π(α, β) = Σ_{k,j} α_k Π_kj β_j`.
    pub fn apply(&self, alpha: &OneForm, beta: &OneForm) -> Result<Expr> {
        alpha.pair(&self.sharp(beta)?)
    }
}

/// A 3-form with packed components `ω_ijk`, `i < j < k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeForm {
    chart: Chart,
    comps: Vec<Expr>,
}

impl ThreeForm {
    pub fn from_fn(chart: Chart, mut f: impl FnMut(usize, usize, usize) -> Expr) -> Self {
        let n = chart.dim();
        let mut comps = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    comps.push(f(i, j, k));
                }
            }
        }
        ThreeForm { chart, comps }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Components in lexicographic order of `i < j < k`.
    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    /// Component for any index triple, with the sign of the sorting permutation.
    pub fn get(&self, i: usize, j: usize, k: usize) -> Expr {
        let mut idx = [i, j, k];
        let mut sign = 1;
        for a in 0..3 {
            for b in 0..2 - a {
                if idx[b] > idx[b + 1] {
                    idx.swap(b, b + 1);
                    sign = -sign;
                }
            }
        }
        if idx[0] == idx[1] || idx[1] == idx[2] {
            return Expr::zero();
        }
        let n = self.chart.dim();
        let mut pos = 0;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if [a, b, c] == idx {
                        let v = self.comps[pos].clone();
                        return if sign < 0 { v.neg() } else { v };
                    }
                    pos += 1;
                }
            }
        }
        unreachable!("index triple within chart dimension")
    }

    pub fn eval_max_abs(&self, p: &[f64]) -> Result<f64> {
        Ok(eval_all(&self.comps, p)?.into_iter().fold(0.0, |m, v| m.max(v.abs())))
    }
}

/// A map between charts given by its target-coordinate components.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMap {
    source: Chart,
    target: Chart,
    comps: Vec<Expr>,
}

impl SmoothMap {
    pub fn new(source: Chart, target: Chart, comps: Vec<Expr>) -> Result<Self> {
        check_len("map", &target, comps.len(), target.dim())?;
        check_vars(&source, &comps)?;
        Ok(SmoothMap { source, target, comps })
    }

    pub fn identity(chart: Chart) -> Self {
        let comps = (0..chart.dim()).map(Expr::var).collect();
        SmoothMap {
            source: chart.clone(),
            target: chart,
            comps,
        }
    }

    pub fn source(&self) -> &Chart {
        &self.source
    }

    pub fn target(&self) -> &Chart {
        &self.target
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        eval_all(&self.comps, p)
    }

    /// `f ∘ F` for an expression `f` on the target.
    pub fn pull(&self, f: &Expr) -> Result<Expr> {
        f.compose(&self.comps)
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &SmoothMap) -> Result<SmoothMap> {
        self.source.ensure_same(&inner.target)?;
        let comps = self.comps.iter().map(|c| inner.pull(c)).collect::<Result<Vec<_>>>()?;
        Ok(SmoothMap {
            source: inner.source.clone(),
            target: self.target.clone(),
            comps,
        })
    }

    /// Symbolic Jacobian, `jac[a][i] = ∂_i F^a`.
    pub fn jacobian(&self) -> Vec<Vec<Expr>> {
        self.comps
            .iter()
            .map(|c| (0..self.source.dim()).map(|i| c.diff(i)).collect())
            .collect()
    }

    /// `(dF)_p` as a `target_dim × source_dim` matrix.
    pub fn jacobian_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let (m, n) = (self.target.dim(), self.source.dim());
        let mut out = DMatrix::zeros(m, n);
        for a in 0..m {
            for i in 0..n {
                out[(a, i)] = self.comps[a].diff(i).eval(p)?;
            }
        }
        Ok(out)
    }

    /// `(dF)_p v`.
    pub fn pushforward_at(&self, p: &[f64], v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.source.dim() {
            return Err(Error::shape("tangent vector length differs from source dimension"));
        }
        Ok(self.jacobian_at(p)? * v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::chart::ChartDomain;

    #[test]
    fn packed_index_is_a_bijection() {
        for n in 1..=8 {
            let mut seen = vec![false; upper_len(n)];
            for i in 0..n {
                for j in i + 1..n {
                    let k = upper_index(n, i, j);
                    assert!(!seen[k]);
                    seen[k] = true;
                }
            }
            assert!(seen.into_iter().all(|s| s));
        }
    }

    #[test]
    fn sharp_convention() {
        let c = ChartDomain::cube("R2", 2, -1.0, 1.0).unwrap();
        let pi = Bivector::new(c.clone(), vec![Expr::one()]).unwrap();
        let s1 = pi.sharp(&OneForm::coordinate(c.clone(), 0)).unwrap();
        let s2 = pi.sharp(&OneForm::coordinate(c.clone(), 1)).unwrap();
        assert_eq!(s1.comps(), &[Expr::zero(), Expr::int(-1)]);
        assert_eq!(s2.comps(), &[Expr::one(), Expr::zero()]);
        let v = pi
            .apply(&OneForm::coordinate(c.clone(), 0), &OneForm::coordinate(c, 1))
            .unwrap();
        assert_eq!(v, Expr::one());
    }

    #[test]
    fn eval_and_derive_examples() {
        let c = ChartDomain::cube("R2", 2, -5.0, 5.0).unwrap();
        let f = ScalarField::parse(c.clone(), "x1*x2").unwrap();
        assert_eq!(f.eval_and_derive(&[2.0, 3.0], &[1, 0]).unwrap(), 3.0);
        let g = ScalarField::parse(c.clone(), "x1^2*exp(x2)").unwrap();
        assert_eq!(g.eval_and_derive(&[1.0, 0.0], &[1, 1]).unwrap(), 2.0);
        assert!(matches!(
            f.eval_and_derive(&[9.0, 0.0], &[0, 0]),
            Err(Error::PointOutsideChart { .. })
        ));
        let c1 = ChartDomain::cube("R", 1, -1.0, 1.0).unwrap();
        let s = ScalarField::parse(c1.clone(), "sin(x1)").unwrap();
        assert_eq!(s.eval_and_derive(&[0.0], &[2]).unwrap(), 0.0);
        let pole = ScalarField::parse(c1, "1/x1").unwrap();
        assert!(matches!(
            pole.eval_and_derive(&[0.0], &[0]),
            Err(Error::EvaluationPole(_))
        ));
    }

    #[test]
    fn three_form_signs() {
        let c = ChartDomain::cube("R3", 3, -1.0, 1.0).unwrap();
        let w = ThreeForm::from_fn(c, |_, _, _| Expr::one());
        assert_eq!(w.get(0, 1, 2), Expr::one());
        assert_eq!(w.get(1, 0, 2), Expr::int(-1));
        assert_eq!(w.get(2, 0, 1), Expr::one());
        assert_eq!(w.get(0, 0, 2), Expr::zero());
    }
}
