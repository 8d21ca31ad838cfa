//! Scalar expressions in a sum-of-products normal form.
//!
//! Every [`Expr`] is kept as a sorted sum of terms, each term a coefficient
//! times a sorted product of atoms raised to non-zero integer powers. Atoms are
//! coordinate variables, `sin`/`cos`/`exp` of a normalized argument, or a
//! multi-term sum that only ever appears with a negative exponent. Products of
//! sums are expanded, so the representation is closed under differentiation and
//! mixed partials commute structurally: `∂i∂j f` and `∂j∂i f` produce the same
//! tree. The form is not canonical for rational functions (no cancellation of
//! common factors), which is enough to keep trees bounded.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// A term coefficient. Rationals stay exact until an operation overflows.
#[derive(Clone, Copy, Debug)]
pub enum Coeff {
    Exact(Rational),
    Real(f64),
}

impl Coeff {
    pub const ZERO: Coeff = Coeff::Exact(Ratio::new_raw(0, 1));
    pub const ONE: Coeff = Coeff::Exact(Ratio::new_raw(1, 1));

    pub fn int(n: i64) -> Self {
        Coeff::Exact(Ratio::from_integer(n))
    }

    pub fn value(self) -> f64 {
        match self {
            Coeff::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Coeff::Real(x) => x,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Coeff::Exact(r) => r.is_zero(),
            Coeff::Real(x) => x == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        matches!(self, Coeff::Exact(r) if r == Ratio::from_integer(1))
    }

    pub fn is_negative(self) -> bool {
        match self {
            Coeff::Exact(r) => r.is_negative(),
            Coeff::Real(x) => x < 0.0,
        }
    }

    pub fn add(self, other: Coeff) -> Coeff {
        match (self, other) {
            (Coeff::Exact(a), Coeff::Exact(b)) => a
                .checked_add(&b)
                .map(Coeff::Exact)
                .unwrap_or(Coeff::Real(self.value() + other.value())),
            _ => Coeff::Real(self.value() + other.value()),
        }
    }

    pub fn mul(self, other: Coeff) -> Coeff {
        match (self, other) {
            (Coeff::Exact(a), Coeff::Exact(b)) => a
                .checked_mul(&b)
                .map(Coeff::Exact)
                .unwrap_or(Coeff::Real(self.value() * other.value())),
            _ => Coeff::Real(self.value() * other.value()),
        }
    }

    pub fn neg(self) -> Coeff {
        match self {
            Coeff::Exact(r) if *r.numer() != i64::MIN => Coeff::Exact(-r),
            other => Coeff::Real(-other.value()),
        }
    }

    pub fn abs(self) -> Coeff {
        if self.is_negative() {
            self.neg()
        } else {
            self
        }
    }

    pub fn recip(self) -> Option<Coeff> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Coeff::Exact(r) if *r.numer() != i64::MIN => Coeff::Exact(r.recip()),
            other => Coeff::Real(1.0 / other.value()),
        })
    }

    fn total_cmp(&self, other: &Coeff) -> Ordering {
        match (self, other) {
            (Coeff::Exact(a), Coeff::Exact(b)) => a.cmp(b),
            (Coeff::Real(a), Coeff::Real(b)) => a.total_cmp(b),
            (Coeff::Exact(_), Coeff::Real(_)) => Ordering::Less,
            (Coeff::Real(_), Coeff::Exact(_)) => Ordering::Greater,
        }
    }
}

impl From<f64> for Coeff {
    fn from(x: f64) -> Self {
        if x.fract() == 0.0 && x.abs() < 9.0e15 {
            Coeff::int(x as i64)
        } else {
            Coeff::Real(x)
        }
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Exact(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Coeff::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Coeff::Real(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Atom {
    Var(usize),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Exp(Arc<Expr>),
    /// A sum of two or more terms; always carries a negative exponent.
    Sum(Arc<Expr>),
}

impl Atom {
    fn rank(&self) -> u8 {
        match self {
            Atom::Var(_) => 0,
            Atom::Sin(_) => 1,
            Atom::Cos(_) => 2,
            Atom::Exp(_) => 3,
            Atom::Sum(_) => 4,
        }
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Atom::Var(a), Atom::Var(b)) => a.cmp(b),
            (Atom::Sin(a), Atom::Sin(b))
            | (Atom::Cos(a), Atom::Cos(b))
            | (Atom::Exp(a), Atom::Exp(b))
            | (Atom::Sum(a), Atom::Sum(b)) => a.as_ref().cmp(b.as_ref()),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Atom {}

type Monomial = Vec<(Atom, i32)>;

#[derive(Clone, Debug)]
pub struct Term {
    coeff: Coeff,
    factors: Monomial,
}

impl Term {
    pub fn coeff(&self) -> Coeff {
        self.coeff
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.factors
    }

    fn cmp_key(&self, other: &Term) -> Ordering {
        self.factors
            .cmp(&other.factors)
            .then_with(|| self.coeff.total_cmp(&other.coeff))
    }
}

/// A scalar expression over chart coordinates `x1..xN`, in normal form.
#[derive(Clone, Debug, Default)]
pub struct Expr {
    terms: Vec<Term>,
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let c = a.cmp_key(b);
            if c != Ordering::Equal {
                return c;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

fn mul_monomials(a: &[(Atom, i32)], b: &[(Atom, i32)]) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                let e = a[i].1 + b[j].1;
                if e != 0 {
                    out.push((a[i].0.clone(), e));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl Expr {
    pub fn zero() -> Self {
        Expr { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Expr::constant(Coeff::ONE)
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(Coeff::int(n))
    }

    pub fn rational(numer: i64, denom: i64) -> Self {
        Expr::constant(Coeff::Exact(Ratio::new(numer, denom)))
    }

    pub fn real(x: f64) -> Self {
        Expr::constant(Coeff::from(x))
    }

    pub fn constant(c: Coeff) -> Self {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: vec![Term {
                coeff: c,
                factors: Vec::new(),
            }],
        }
    }

    /// The coordinate function with zero-based index `i` (printed `x{i+1}`).
    pub fn var(i: usize) -> Self {
        Expr::atom(Atom::Var(i), 1)
    }

    fn atom(a: Atom, e: i32) -> Self {
        Expr {
            terms: vec![Term {
                coeff: Coeff::ONE,
                factors: vec![(a, e)],
            }],
        }
    }

    fn from_map(map: BTreeMap<Monomial, Coeff>) -> Self {
        let terms = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(factors, coeff)| Term { coeff, factors })
            .collect();
        Expr { terms }
    }

    fn accumulate(map: &mut BTreeMap<Monomial, Coeff>, factors: Monomial, coeff: Coeff) {
        match map.get_mut(&factors) {
            Some(c) => *c = c.add(coeff),
            None => {
                map.insert(factors, coeff);
            }
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.as_slice() {
            [] => Some(0.0),
            [t] if t.factors.is_empty() => Some(t.coeff.value()),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    /// Number of nodes, used to watch tree growth in tests.
    pub fn size(&self) -> usize {
        self.terms
            .iter()
            .map(|t| {
                1 + t
                    .factors
                    .iter()
                    .map(|(a, _)| match a {
                        Atom::Var(_) => 1,
                        Atom::Sin(g) | Atom::Cos(g) | Atom::Exp(g) | Atom::Sum(g) => 1 + g.size(),
                    })
                    .sum::<usize>()
            })
            .sum()
    }

    /// One more than the largest variable index used, 0 for constants.
    pub fn var_bound(&self) -> usize {
        let mut bound = 0;
        for t in &self.terms {
            for (a, _) in &t.factors {
                let b = match a {
                    Atom::Var(i) => i + 1,
                    Atom::Sin(g) | Atom::Cos(g) | Atom::Exp(g) | Atom::Sum(g) => g.var_bound(),
                };
                bound = bound.max(b);
            }
        }
        bound
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut map = BTreeMap::new();
        for t in self.terms.iter().chain(&other.terms) {
            Expr::accumulate(&mut map, t.factors.clone(), t.coeff);
        }
        Expr::from_map(map)
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Expr {
        Expr {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff.neg(),
                    factors: t.factors.clone(),
                })
                .collect(),
        }
    }

    pub fn scale(&self, c: Coeff) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        let mut map = BTreeMap::new();
        for t in &self.terms {
            Expr::accumulate(&mut map, t.factors.clone(), t.coeff.mul(c));
        }
        Expr::from_map(map)
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if let Some(e) = Expr::cancel_sum(self, other).or_else(|| Expr::cancel_sum(other, self)) {
            return e;
        }
        let mut map = BTreeMap::new();
        for a in &self.terms {
            for b in &other.terms {
                let factors = mul_monomials(&a.factors, &b.factors);
                Expr::accumulate(&mut map, factors, a.coeff.mul(b.coeff));
            }
        }
        Expr::from_map(map)
    }

    /// `t · g` where the single term `t` holds `g` with a negative exponent.
    fn cancel_sum(single: &Expr, g: &Expr) -> Option<Expr> {
        let [t] = single.terms.as_slice() else {
            return None;
        };
        if g.terms.len() < 2 {
            return None;
        }
        let k = t
            .factors
            .iter()
            .position(|(a, _)| matches!(a, Atom::Sum(s) if s.as_ref() == g))?;
        let mut factors = t.factors.clone();
        if factors[k].1 == -1 {
            factors.remove(k);
        } else {
            factors[k].1 += 1;
        }
        Some(Expr {
            terms: vec![Term {
                coeff: t.coeff,
                factors,
            }],
        })
    }

    pub fn sum<'a>(items: impl IntoIterator<Item = &'a Expr>) -> Expr {
        let mut map = BTreeMap::new();
        for e in items {
            for t in &e.terms {
                Expr::accumulate(&mut map, t.factors.clone(), t.coeff);
            }
        }
        Expr::from_map(map)
    }

    /// Integer power. Negative powers of the zero expression are rejected.
    pub fn pow(&self, n: i32) -> Result<Expr> {
        if n == 0 {
            return Ok(Expr::one());
        }
        if n > 0 {
            let mut result = Expr::one();
            let mut base = self.clone();
            let mut k = n as u32;
            while k > 0 {
                if k & 1 == 1 {
                    result = result.mul(&base);
                }
                k >>= 1;
                if k > 0 {
                    base = base.mul(&base);
                }
            }
            return Ok(result);
        }
        match self.terms.as_slice() {
            [] => Err(Error::DivisionByZero),
            [t] => {
                let inv = Term {
                    coeff: t.coeff.recip().ok_or(Error::DivisionByZero)?,
                    factors: t.factors.iter().map(|(a, e)| (a.clone(), -e)).collect(),
                };
                Expr::from_term(inv).pow(-n)
            }
            _ => Ok(Expr::atom(Atom::Sum(Arc::new(self.clone())), n)),
        }
    }

    /// Builds an expression from a term whose `Sum` atoms may carry positive
    /// exponents, expanding those.
    fn from_term(t: Term) -> Expr {
        let (sums, rest): (Vec<_>, Vec<_>) = t
            .factors
            .into_iter()
            .partition(|(a, e)| matches!(a, Atom::Sum(_)) && *e > 0);
        let mut out = Expr {
            terms: vec![Term {
                coeff: t.coeff,
                factors: rest,
            }],
        };
        for (a, e) in sums {
            if let Atom::Sum(g) = a {
                out = out.mul(&g.pow(e).expect("positive power"));
            }
        }
        out
    }

    pub fn recip(&self) -> Result<Expr> {
        self.pow(-1)
    }

    pub fn div(&self, other: &Expr) -> Result<Expr> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn sin(&self) -> Expr {
        match self.as_constant() {
            Some(0.0) => Expr::zero(),
            Some(c) => Expr::real(c.sin()),
            None => Expr::atom(Atom::Sin(Arc::new(self.clone())), 1),
        }
    }

    pub fn cos(&self) -> Expr {
        match self.as_constant() {
            Some(0.0) => Expr::one(),
            Some(c) => Expr::real(c.cos()),
            None => Expr::atom(Atom::Cos(Arc::new(self.clone())), 1),
        }
    }

    pub fn exp(&self) -> Expr {
        match self.as_constant() {
            Some(0.0) => Expr::one(),
            Some(c) => Expr::real(c.exp()),
            None => Expr::atom(Atom::Exp(Arc::new(self.clone())), 1),
        }
    }

    /// Exact partial derivative with respect to the variable `i`.
    pub fn diff(&self, i: usize) -> Expr {
        let mut parts = Vec::new();
        for t in &self.terms {
            for (k, (atom, e)) in t.factors.iter().enumerate() {
                let inner = atom_derivative(atom, i);
                if inner.is_zero() {
                    continue;
                }
                let mut factors = t.factors.clone();
                if *e == 1 {
                    factors.remove(k);
                } else {
                    factors[k].1 = e - 1;
                }
                let outer = Expr {
                    terms: vec![Term {
                        coeff: t.coeff.mul(Coeff::int(*e as i64)),
                        factors,
                    }],
                };
                parts.push(outer.mul(&inner));
            }
        }
        Expr::sum(parts.iter())
    }

    /// Partial derivative for a multi-index `order` (entry `k` = number of
    /// derivatives in variable `k`).
    pub fn derive(&self, order: &[u32]) -> Expr {
        let mut e = self.clone();
        for (var, &count) in order.iter().enumerate() {
            for _ in 0..count {
                e = e.diff(var);
            }
        }
        e
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for t in &self.terms {
            let mut prod = t.coeff.value();
            for (atom, e) in &t.factors {
                let v = match atom {
                    Atom::Var(i) => *point
                        .get(*i)
                        .ok_or_else(|| Error::shape(format!("variable x{} not available at {point:?}", i + 1)))?,
                    Atom::Sin(g) => g.eval(point)?.sin(),
                    Atom::Cos(g) => g.eval(point)?.cos(),
                    Atom::Exp(g) => g.eval(point)?.exp(),
                    Atom::Sum(g) => g.eval(point)?,
                };
                if *e < 0 && v == 0.0 {
                    return Err(Error::EvaluationPole(format!("zero denominator at {point:?}")));
                }
                prod *= v.powi(*e);
            }
            total += prod;
        }
        if !total.is_finite() {
            return Err(Error::EvaluationPole(format!("non-finite value at {point:?}")));
        }
        Ok(total)
    }

    /// Substitutes `subs[i]` for every occurrence of variable `i`.
    pub fn compose(&self, subs: &[Expr]) -> Result<Expr> {
        let mut parts = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mut prod = Expr::constant(t.coeff);
            for (atom, e) in &t.factors {
                let base = match atom {
                    Atom::Var(i) => subs
                        .get(*i)
                        .ok_or_else(|| {
                            Error::shape(format!("substitution for x{} missing ({} given)", i + 1, subs.len()))
                        })?
                        .clone(),
                    Atom::Sin(g) => g.compose(subs)?.sin(),
                    Atom::Cos(g) => g.compose(subs)?.cos(),
                    Atom::Exp(g) => g.compose(subs)?.exp(),
                    Atom::Sum(g) => g.compose(subs)?,
                };
                prod = prod.mul(&base.pow(*e)?);
            }
            parts.push(prod);
        }
        Ok(Expr::sum(parts.iter()))
    }

    /// Renders with custom variable names.
    pub fn display_with<'a>(&'a self, names: &'a [&'a str]) -> impl fmt::Display + 'a {
        Named { expr: self, names }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, names: &[&str]) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            let coeff = if k == 0 {
                t.coeff
            } else if t.coeff.is_negative() {
                write!(f, " - ")?;
                t.coeff.abs()
            } else {
                write!(f, " + ")?;
                t.coeff
            };
            if t.factors.is_empty() {
                write!(f, "{coeff}")?;
                continue;
            }
            if coeff.is_one() {
            } else if coeff.neg().is_one() {
                write!(f, "-")?;
            } else {
                write!(f, "{coeff}*")?;
            }
            for (n, (atom, e)) in t.factors.iter().enumerate() {
                if n > 0 {
                    write!(f, "*")?;
                }
                match atom {
                    Atom::Var(i) => match names.get(*i) {
                        Some(name) => write!(f, "{name}")?,
                        None => write!(f, "x{}", i + 1)?,
                    },
                    Atom::Sin(g) => {
                        write!(f, "sin(")?;
                        g.write(f, names)?;
                        write!(f, ")")?;
                    }
                    Atom::Cos(g) => {
                        write!(f, "cos(")?;
                        g.write(f, names)?;
                        write!(f, ")")?;
                    }
                    Atom::Exp(g) => {
                        write!(f, "exp(")?;
                        g.write(f, names)?;
                        write!(f, ")")?;
                    }
                    Atom::Sum(g) => {
                        write!(f, "(")?;
                        g.write(f, names)?;
                        write!(f, ")")?;
                    }
                }
                if *e < 0 {
                    write!(f, "^({e})")?;
                } else if *e != 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

fn atom_derivative(atom: &Atom, i: usize) -> Expr {
    match atom {
        Atom::Var(j) => {
            if *j == i {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Atom::Sin(g) => {
            let dg = g.diff(i);
            if dg.is_zero() {
                return dg;
            }
            g.cos().mul(&dg)
        }
        Atom::Cos(g) => {
            let dg = g.diff(i);
            if dg.is_zero() {
                return dg;
            }
            g.sin().neg().mul(&dg)
        }
        Atom::Exp(g) => {
            let dg = g.diff(i);
            if dg.is_zero() {
                return dg;
            }
            g.exp().mul(&dg)
        }
        Atom::Sum(g) => g.diff(i),
    }
}

struct Named<'a> {
    expr: &'a Expr,
    names: &'a [&'a str],
}

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.write(f, self.names)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, &[])
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl std::ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$inner(self, rhs)
            }
        }
        impl std::ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$inner(&self, &rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Expr {
        Expr::var(i)
    }

    #[test]
    fn like_terms_cancel() {
        let e = &(&x(0) * &x(1)) - &(&x(1) * &x(0));
        assert!(e.is_zero());
    }

    #[test]
    fn mixed_partials_are_structurally_equal() {
        let f = x(0).pow(2).unwrap().mul(&x(1).exp()).mul(&(&x(0) + &x(1)).sin());
        assert_eq!(f.diff(0).diff(1), f.diff(1).diff(0));
    }

    #[test]
    fn negative_powers_of_sums() {
        let s = &x(0) + &Expr::one();
        let inv = s.recip().unwrap();
        assert_eq!(inv.eval(&[1.0]).unwrap(), 0.5);
        // d/dx (x+1)^-1 = -(x+1)^-2
        assert_eq!(inv.diff(0).eval(&[1.0]).unwrap(), -0.25);
        // inverting twice expands back
        assert_eq!(inv.recip().unwrap(), s);
    }

    #[test]
    fn pole_is_an_error() {
        let e = x(0).recip().unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(Error::EvaluationPole(_))));
        assert_eq!(Expr::zero().recip(), Err(Error::DivisionByZero));
    }

    #[test]
    fn exact_rational_arithmetic() {
        let half = Expr::rational(1, 2);
        let e = &half + &half;
        assert_eq!(e, Expr::one());
        assert_eq!(format!("{}", Expr::rational(3, 2).mul(&x(0))), "3/2*x1");
    }

    #[test]
    fn constant_folding_of_functions() {
        assert_eq!(Expr::zero().sin(), Expr::zero());
        assert_eq!(Expr::zero().exp(), Expr::one());
        assert_eq!(Expr::zero().cos(), Expr::one());
    }

    #[test]
    fn compose_substitutes() {
        // f(x1, x2) = x1 * x2 ; f(t, -t) = -t^2
        let f = &x(0) * &x(1);
        let g = f.compose(&[x(0), x(0).neg()]).unwrap();
        assert_eq!(g, x(0).pow(2).unwrap().neg());
    }

    mod properties {
        use crate::calculus::strategies::{polynomial, smooth};
        use proptest::prelude::*;

        fn point() -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(-1.0f64..1.0, 2)
        }

        fn close(a: f64, b: f64) -> bool {
            (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
        }

        proptest! {
            #[test]
            fn product_rule(f in smooth(2), g in smooth(2), p in point()) {
                let lhs = f.mul(&g).diff(0).eval(&p).unwrap();
                let rhs = f.diff(0).eval(&p).unwrap() * g.eval(&p).unwrap() + f.eval(&p).unwrap() * g.diff(0).eval(&p).unwrap();
                prop_assert!(close(lhs, rhs), "{lhs} vs {rhs}");
            }

            #[test]
            fn chain_rule(f in smooth(2), g in polynomial(2, 2), h in polynomial(2, 2), p in point()) {
                let comp = f.compose(&[g.clone(), h.clone()]).unwrap();
                let q = [g.eval(&p).unwrap(), h.eval(&p).unwrap()];
                let lhs = comp.diff(1).eval(&p).unwrap();
                let rhs = f.diff(0).eval(&q).unwrap() * g.diff(1).eval(&p).unwrap()
                    + f.diff(1).eval(&q).unwrap() * h.diff(1).eval(&p).unwrap();
                prop_assert!(close(lhs, rhs), "{lhs} vs {rhs}");
            }

            #[test]
            fn mixed_partials_commute(f in smooth(3)) {
                prop_assert_eq!(f.diff(0).diff(2), f.diff(2).diff(0));
            }

            #[test]
            fn display_parses_back(f in smooth(3), p in proptest::collection::vec(-1.0f64..1.0, 3)) {
                let back = crate::calculus::parse_expr(&f.to_string(), 3).unwrap();
                prop_assert!(close(back.eval(&p).unwrap(), f.eval(&p).unwrap()));
            }
        }
    }
}
