//! A-paths and their transport through actions.
//!
//! An A-path is a chain of segments, each given on a local parameter
//! `s ∈ [0, 1]` (variable `x1`, written `t` in scenarios) by coefficient
//! curves `a_i(s)` and a base curve `c(s)` with `Σ a_i(s) ρ(e_i)_{c(s)} = c′(s)`.
//! Segment `k` of `N` occupies global time `[k/N, (k+1)/N]`; transport runs
//! segment by segment, restarting the integrator at each junction.

use std::sync::Arc;

use crate::action::{ActionModel, MoritaWitness};
use crate::algebroid::LieAlgebroidModel;
use crate::calculus::{parse_with_aliases, Expr, SmoothMap};
use crate::error::{Error, Result};
use crate::ode::{integrate, IntegratorConfig, Trajectory};
use crate::report::{CheckOptions, CheckReport, ReportBuilder, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct PathSegment {
    coeffs: Vec<Expr>,
    base: Vec<Expr>,
}

impl PathSegment {
    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn base(&self) -> &[Expr] {
        &self.base
    }

    fn eval(exprs: &[Expr], s: f64) -> Result<Vec<f64>> {
        exprs.iter().map(|e| e.eval(&[s])).collect()
    }

    /// `s ↦ s²`: coefficients `a(s²)·2s`, base `c(s²)`.
    fn squared(&self) -> Result<PathSegment> {
        let s = Expr::var(0);
        let sq = s.mul(&s);
        let speed = s.scale(crate::calculus::Coeff::int(2));
        Ok(PathSegment {
            coeffs: self
                .coeffs
                .iter()
                .map(|a| Ok(a.compose(std::slice::from_ref(&sq))?.mul(&speed)))
                .collect::<Result<Vec<_>>>()?,
            base: self
                .base
                .iter()
                .map(|c| c.compose(std::slice::from_ref(&sq)))
                .collect::<Result<Vec<_>>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct APath {
    algebroid: Arc<LieAlgebroidModel>,
    segments: Vec<PathSegment>,
}

impl APath {
    /// A one-segment path; expressions use variable `x1` as the parameter.
    pub fn new(algebroid: Arc<LieAlgebroidModel>, coeffs: Vec<Expr>, base: Vec<Expr>) -> Result<Self> {
        if coeffs.len() != algebroid.rank() {
            return Err(Error::InvalidPath(format!(
                "{} coefficient curves for rank {}",
                coeffs.len(),
                algebroid.rank()
            )));
        }
        if base.len() != algebroid.base().dim() {
            return Err(Error::InvalidPath(format!(
                "base curve has {} components, base dimension is {}",
                base.len(),
                algebroid.base().dim()
            )));
        }
        if let Some(e) = coeffs.iter().chain(&base).find(|e| e.var_bound() > 1) {
            return Err(Error::InvalidPath(format!(
                "`{e}` depends on more than the path parameter"
            )));
        }
        Ok(APath {
            algebroid,
            segments: vec![PathSegment { coeffs, base }],
        })
    }

    /// Parses coefficient and base expressions in the parameter `t`.
    pub fn parse(algebroid: Arc<LieAlgebroidModel>, coeffs: &[&str], base: &[&str]) -> Result<Self> {
        let p = |v: &[&str]| {
            v.iter()
                .map(|s| parse_with_aliases(s, 1, &["t"]))
                .collect::<Result<Vec<_>>>()
        };
        APath::new(algebroid, p(coeffs)?, p(base)?)
    }

    /// The constant path at `point` with zero coefficients.
    pub fn constant(algebroid: Arc<LieAlgebroidModel>, point: &[f64]) -> Result<Self> {
        let coeffs = vec![Expr::zero(); algebroid.rank()];
        let base = point.iter().map(|&x| Expr::real(x)).collect();
        APath::new(algebroid, coeffs, base)
    }

    pub fn algebroid(&self) -> &Arc<LieAlgebroidModel> {
        &self.algebroid
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &APath) -> Result<APath> {
        if self.algebroid.label() != next.algebroid.label() {
            return Err(Error::AlgebroidMismatch {
                expected: self.algebroid.label().to_string(),
                found: next.algebroid.label().to_string(),
            });
        }
        let mut segments = self.segments.clone();
        segments.extend(next.segments.iter().cloned());
        Ok(APath {
            algebroid: self.algebroid.clone(),
            segments,
        })
    }

    /// Every segment reparametrized by `s ↦ s²`.
    pub fn reparametrized_square(&self) -> Result<APath> {
        Ok(APath {
            algebroid: self.algebroid.clone(),
            segments: self
                .segments
                .iter()
                .map(PathSegment::squared)
                .collect::<Result<Vec<_>>>()?,
        })
    }

    pub fn start(&self) -> Result<Vec<f64>> {
        PathSegment::eval(&self.segments[0].base, 0.0)
    }

    pub fn end(&self) -> Result<Vec<f64>> {
        PathSegment::eval(&self.segments[self.segments.len() - 1].base, 1.0)
    }

    /// Base point at global time `t ∈ [0, 1]`.
    pub fn base_at(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.segments.len();
        let k = ((t * n as f64).floor() as usize).min(n - 1);
        PathSegment::eval(&self.segments[k].base, t * n as f64 - k as f64)
    }
}

/// `Σ a_i ρ(e_i)∘c − c′` on every segment and continuity at junctions.
pub fn validate_apath(a: &APath, opts: &CheckOptions, time_samples: usize) -> CheckReport {
    let mut rep = ReportBuilder::new("apath_valid", opts.tol);
    rep.declare("anchor");
    let steps = time_samples.max(2) - 1;
    let times: Vec<Vec<f64>> = (0..=steps).map(|k| vec![k as f64 / steps as f64]).collect();
    for seg in &a.segments {
        let res: Result<Vec<Expr>> = (0..seg.base.len())
            .map(|k| {
                let mut terms = Vec::with_capacity(seg.coeffs.len() + 1);
                for (i, ai) in seg.coeffs.iter().enumerate() {
                    if !ai.is_zero() {
                        terms.push(ai.mul(&a.algebroid.anchor(i).comps()[k].compose(&seg.base)?));
                    }
                }
                terms.push(seg.base[k].diff(0).neg());
                Ok(Expr::sum(terms.iter()))
            })
            .collect();
        match res {
            Ok(e) => rep.observe_exprs("anchor", &e, &times),
            Err(e) => rep.status("anchor", Status::Error, 0.0, Some(e.to_string())),
        }
    }
    rep.declare("continuity");
    for (k, pair) in a.segments.windows(2).enumerate() {
        let gap = PathSegment::eval(&pair[0].base, 1.0).and_then(|end| {
            let start = PathSegment::eval(&pair[1].base, 0.0)?;
            Ok(end.iter().zip(&start).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
        });
        match gap {
            Ok(g) => rep.observe("continuity", g, &[(k + 1) as f64 / a.segments.len() as f64]),
            Err(e) => rep.observe_error("continuity", &e, &[]),
        }
    }
    rep.finish()
}

/// A transported trajectory with its base-path tracking residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Transport {
    pub trajectory: Trajectory,
    /// `max_t |μ(u(t)) − c(t)|` over the output grid.
    pub tracking: f64,
}

impl Transport {
    pub fn end(&self) -> &[f64] {
        self.trajectory.end()
    }
}

fn ensure_same_algebroid(a: &APath, act: &ActionModel) -> Result<()> {
    if a.algebroid.label() != act.algebroid().label() {
        return Err(Error::AlgebroidMismatch {
            expected: act.algebroid().label().to_string(),
            found: a.algebroid.label().to_string(),
        });
    }
    Ok(())
}

/// Integrates `du/dt = ±Σ a_i(t) X_i(u)`, the sign being the side sign so that
/// `μ ∘ u` follows `c` for left and right actions alike.
fn flow_coefficients(a: &APath, act: &ActionModel, x0: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
    let sign = act.side().sign() as f64;
    let n = a.segments.len() as f64;
    let mut times = vec![0.0];
    let mut states = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    for (k, seg) in a.segments.iter().enumerate() {
        let active: Vec<usize> = (0..seg.coeffs.len()).filter(|&i| !seg.coeffs[i].is_zero()).collect();
        let rhs = |s: f64, u: &[f64]| -> Result<Vec<f64>> {
            let mut du = vec![0.0; u.len()];
            for &i in &active {
                let w = sign * seg.coeffs[i].eval(&[s])?;
                for (d, v) in du.iter_mut().zip(act.fields()[i].eval(u)?.iter()) {
                    *d += w * v;
                }
            }
            Ok(du)
        };
        let tr = integrate(rhs, 0.0, 1.0, &x, cfg)?;
        for (s, u) in tr.times.iter().zip(&tr.states).skip(1) {
            times.push((k as f64 + s) / n);
            states.push(u.clone());
        }
        x = tr.end().to_vec();
    }
    Ok(Trajectory { times, states })
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Transport of `x0` along `a` through `act`; requires `μ(x0) = c(0)` within
/// `cfg.max_error`.
pub fn integrate_apath(a: &APath, act: &ActionModel, x0: &[f64], cfg: &IntegratorConfig) -> Result<Transport> {
    ensure_same_algebroid(a, act)?;
    act.total().ensure_contains(x0)?;
    let offset = max_gap(&act.momentum().eval(x0)?, &a.start()?);
    if !(offset <= cfg.max_error) {
        return Err(Error::InitialFiberMismatch { offset });
    }
    let trajectory = flow_coefficients(a, act, x0, cfg)?;
    let mut tracking: f64 = 0.0;
    for (t, u) in trajectory.times.iter().zip(&trajectory.states) {
        tracking = tracking.max(max_gap(&act.momentum().eval(u)?, &a.base_at(*t)?));
    }
    Ok(Transport { trajectory, tracking })
}

/// Fiber constancy along the other momentum of `witness`, invariance under
/// `s ↦ s²`, and commutation of the left and right frame flows from `x0`.
pub fn check_transport_invariances(
    a: &APath,
    act: &ActionModel,
    x0: &[f64],
    cfg: &IntegratorConfig,
    witness: Option<&MoritaWitness>,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let mut rep = ReportBuilder::new("transport_invariances", opts.tol);
    let base = integrate_apath(a, act, x0, cfg)?;
    rep.observe("tracking", base.tracking, x0);
    let re = integrate_apath(&a.reparametrized_square()?, act, x0, cfg)?;
    rep.observe("reparametrization", max_gap(re.end(), base.end()), x0);
    let Some(w) = witness else {
        rep.status(
            "fiber_constancy",
            Status::Inconclusive,
            0.0,
            Some("no witness supplied".into()),
        );
        rep.status(
            "flow_commutation",
            Status::Inconclusive,
            0.0,
            Some("no witness supplied".into()),
        );
        return Ok(rep.finish());
    };
    let other = if act.momentum() == w.left().momentum() && act.fields() == w.left().fields() {
        w.right().momentum()
    } else {
        w.left().momentum()
    };
    let j0 = other.eval(x0)?;
    rep.declare("fiber_constancy");
    for u in &base.trajectory.states {
        rep.observe("fiber_constancy", max_gap(&other.eval(u)?, &j0), u);
    }
    rep.declare("flow_commutation");
    let grid: Vec<f64> = (0..5).map(|k| k as f64 / 4.0).collect();
    let flow = |f: &crate::calculus::VectorField, t: f64, x: &[f64]| -> Result<Vec<f64>> {
        if t == 0.0 || f.is_zero() {
            return Ok(x.to_vec());
        }
        Ok(integrate(|_, u| Ok(f.eval(u)?.as_slice().to_vec()), 0.0, t, x, cfg)?
            .end()
            .to_vec())
    };
    for f1 in w.left().fields() {
        for f2 in w.right().fields() {
            for &t in &grid {
                for &s in &grid {
                    let one = flow(f1, t, &flow(f2, s, x0)?)?;
                    let two = flow(f2, s, &flow(f1, t, x0)?)?;
                    rep.observe("flow_commutation", max_gap(&one, &two), &[t, s]);
                }
            }
        }
    }
    Ok(rep.finish())
}

/// Result of transporting a module point across the bimodule.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiOutcome {
    pub point: Vec<f64>,
    /// `|f(b·n) − b·f(n)|` when a module morphism `f` was supplied.
    pub morphism_residual: Option<f64>,
}

/// Moves `n0` along the connecting `A1`-path from `J1(x′)` to `J1(x)`,
/// for `(x′, x)` in the fiber product over `J2`.
///
/// A supplied morphism `f` is checked by transporting `f(n0)` along the same
/// coefficient curves.
#[allow(clippy::too_many_arguments)]
pub fn psi_transport(
    w: &MoritaWitness,
    x_pair: (&[f64], &[f64]),
    path: &APath,
    module: &ActionModel,
    n0: &[f64],
    cfg: &IntegratorConfig,
    morphism: Option<&SmoothMap>,
    opts: &CheckOptions,
) -> Result<PsiOutcome> {
    let (xp, x) = x_pair;
    let j1 = w.left().momentum();
    let j2 = w.right().momentum();
    let gap = max_gap(&j2.eval(xp)?, &j2.eval(x)?);
    if !(gap <= opts.tol) {
        return Err(Error::BasePointMismatch(format!("J2(x′) and J2(x) differ by {gap:e}")));
    }
    if path.algebroid.label() != w.left().algebroid().label() {
        return Err(Error::AlgebroidMismatch {
            expected: w.left().algebroid().label().to_string(),
            found: path.algebroid.label().to_string(),
        });
    }
    let valid = validate_apath(path, opts, 33);
    if !valid.passed() {
        return Err(Error::NoConnectingPath(format!(
            "path is not an A-path: residual {:e}",
            valid.residual
        )));
    }
    let ends = max_gap(&path.start()?, &j1.eval(xp)?).max(max_gap(&path.end()?, &j1.eval(x)?));
    if !(ends <= opts.tol) {
        return Err(Error::NoConnectingPath(format!(
            "path endpoints miss J1(x′), J1(x) by {ends:e}"
        )));
    }
    let moved = integrate_apath(path, module, n0, cfg)?;
    let point = moved.end().to_vec();
    let morphism_residual = match morphism {
        None => None,
        Some(f) => {
            let fn0 = f.eval(n0)?;
            let via = flow_coefficients(path, module, &fn0, cfg)?;
            Some(max_gap(&f.eval(&point)?, via.end()))
        }
    };
    Ok(PsiOutcome {
        point,
        morphism_residual,
    })
}
