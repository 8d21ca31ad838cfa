//! Infinitesimal actions of Lie algebroids on manifolds over a momentum map.
//!
//! With side sign `s = +1` (right) or `s = −1` (left) an action satisfies
//! `dμ(X_i) = s · ρ(e_i) ∘ μ` and `[X_i, X_j] = s · Σ_k (c^k_ij ∘ μ) X_k`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebroid::{pullback_fiber, LieAlgebroidModel};
use crate::calculus::solve::solve_at;
use crate::calculus::{lie_bracket_vf, Chart, Expr, SmoothMap, VectorField};
use crate::error::{Error, Result};
use crate::linalg;
use crate::ode::{integrate, IntegratorConfig};
use crate::report::{CheckOptions, CheckReport, ReportBuilder, Status};

pub mod morita;

pub use morita::{
    check_bimodule_composition, check_quasi_equivalence, check_strong_morita, tensor_distribution, BimoduleComposition,
    MoritaWitness, TensorDistribution,
};

pub const DEFAULT_HORIZON: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> i64 {
        match self {
            Side::Left => -1,
            Side::Right => 1,
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionModel {
    algebroid: Arc<LieAlgebroidModel>,
    momentum: SmoothMap,
    fields: Vec<VectorField>,
    side: Side,
    horizon: f64,
}

impl ActionModel {
    pub fn new(
        algebroid: Arc<LieAlgebroidModel>,
        momentum: SmoothMap,
        fields: Vec<VectorField>,
        side: Side,
    ) -> Result<Self> {
        algebroid.base().ensure_same(momentum.target())?;
        if fields.len() != algebroid.rank() {
            return Err(Error::RankMismatch(format!(
                "{} action fields for an algebroid of rank {}",
                fields.len(),
                algebroid.rank()
            )));
        }
        for f in &fields {
            momentum.source().ensure_same(f.chart())?;
        }
        Ok(ActionModel {
            algebroid,
            momentum,
            fields,
            side,
            horizon: DEFAULT_HORIZON,
        })
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn algebroid(&self) -> &Arc<LieAlgebroidModel> {
        &self.algebroid
    }

    pub fn total(&self) -> &Chart {
        self.momentum.source()
    }

    pub fn momentum(&self) -> &SmoothMap {
        &self.momentum
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `ξ(Σ f_i e_i) = Σ (f_i ∘ μ) X_i`.
    pub fn field_of(&self, coeffs: &[Expr]) -> Result<VectorField> {
        if coeffs.len() != self.fields.len() {
            return Err(Error::RankMismatch("section coefficient count".into()));
        }
        let mut out = VectorField::zero(self.total().clone());
        for (f, x) in coeffs.iter().zip(&self.fields) {
            if !f.is_zero() {
                out = out.add(&x.scale(&self.momentum.pull(f)?))?;
            }
        }
        Ok(out)
    }

    /// `X_i` evaluated at `p`, as columns.
    pub fn fields_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.total().dim(), self.fields.len());
        for (i, x) in self.fields.iter().enumerate() {
            m.set_column(i, &x.eval(p)?);
        }
        Ok(m)
    }

    /// The same fields read with the opposite side convention, i.e. the action
    /// of the opposite algebroid given by `−X_i`.
    pub fn negated(&self, algebroid: Arc<LieAlgebroidModel>) -> Result<ActionModel> {
        ActionModel::new(
            algebroid,
            self.momentum.clone(),
            self.fields.iter().map(VectorField::neg).collect(),
            self.side.flip(),
        )
        .map(|a| a.with_horizon(self.horizon))
    }

    /// The fields in the frame `e′_a = Σ_i g_ia e_i` of `algebroid`, which must
    /// be the model re-expressed in that frame.
    pub fn change_frame(&self, algebroid: Arc<LieAlgebroidModel>, g: &[Vec<Expr>]) -> Result<ActionModel> {
        let r = self.fields.len();
        let fields = (0..r)
            .map(|a| self.field_of(&(0..r).map(|i| g[i][a].clone()).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        ActionModel::new(algebroid, self.momentum.clone(), fields, self.side).map(|m| m.with_horizon(self.horizon))
    }
}

/// Anchor compatibility and (anti-)homomorphism residuals over samples.
pub fn check_action(a: &ActionModel, opts: &CheckOptions) -> CheckReport {
    let mut rep = ReportBuilder::new("action", opts.tol);
    let points = a.total().samples(opts.samples, opts.seed);
    let s = Expr::int(a.side.sign());
    rep.declare("compatibility");
    rep.declare("homomorphism");
    let jac = a.momentum.jacobian();
    let alg = &a.algebroid;
    for (i, x) in a.fields.iter().enumerate() {
        let res: Result<Vec<Expr>> = (0..alg.base().dim())
            .map(|k| {
                let push: Vec<Expr> = jac[k].iter().zip(x.comps()).map(|(d, v)| d.mul(v)).collect();
                let target = a.momentum.pull(&alg.anchor(i).comps()[k])?;
                Ok(Expr::sum(push.iter()).sub(&target.mul(&s)))
            })
            .collect();
        match res {
            Ok(e) => rep.observe_exprs("compatibility", &e, &points),
            Err(e) => rep.status("compatibility", Status::Error, 0.0, Some(e.to_string())),
        }
    }
    for i in 0..a.fields.len() {
        for j in i + 1..a.fields.len() {
            let res: Result<Vec<Expr>> = (|| {
                let lhs = lie_bracket_vf(&a.fields[i], &a.fields[j])?;
                let rhs = a.field_of(&alg.structure(i, j))?.scale(&s);
                Ok(lhs.sub(&rhs)?.into_comps())
            })();
            match res {
                Ok(e) => rep.observe_exprs("homomorphism", &e, &points),
                Err(e) => rep.status("homomorphism", Status::Error, 0.0, Some(e.to_string())),
            }
        }
    }
    rep.finish()
}

/// Outcome of integrating vector fields over a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletenessProbe {
    pub status: Status,
    pub note: String,
    pub point: Option<Vec<f64>>,
}

/// Integrates each field from up to eight sampled points over `[0, horizon]`.
///
/// Blow-up (non-finite state, norm beyond the integrator bound, step collapse)
/// fails. Staying in the chart passes. Leaving the chart passes while the
/// displacement after exit stays within twice the linear extrapolation of the
/// exit speed, and is inconclusive otherwise.
pub fn probe_completeness(
    fields: &[VectorField],
    chart: &Chart,
    horizon: f64,
    opts: &CheckOptions,
) -> CompletenessProbe {
    let starts = chart.samples(opts.samples.min(8), opts.seed);
    let cfg = IntegratorConfig {
        step: (horizon / 1000.0).clamp(1e-6, 1e-2),
        max_error: 1e-6,
        max_norm: 1e8,
    };
    let mut worst = CompletenessProbe {
        status: Status::Pass,
        note: format!("all flows stay bounded on [0, {horizon}]"),
        point: None,
    };
    for (i, x) in fields.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for p in &starts {
            let flow = integrate(|_, u| Ok(x.eval(u)?.as_slice().to_vec()), 0.0, horizon, p, &cfg);
            let (status, note) = match flow {
                Err(e) => (Status::Fail, format!("field {} from {p:?}: {e}", i + 1)),
                Ok(tr) => classify_exit(chart, x, &tr.times, &tr.states)
                    .map(|msg| (Status::Inconclusive, format!("field {} from {p:?}: {msg}", i + 1)))
                    .unwrap_or((Status::Pass, String::new())),
            };
            if status > worst.status {
                worst = CompletenessProbe {
                    status,
                    note,
                    point: Some(p.clone()),
                };
            }
        }
    }
    worst
}

fn classify_exit(chart: &Chart, x: &VectorField, times: &[f64], states: &[Vec<f64>]) -> Option<String> {
    let e = states.iter().position(|u| !chart.contains(u))?;
    let speed = x.eval(&states[e]).map(|v| v.norm()).unwrap_or(f64::INFINITY);
    for k in e + 1..states.len() {
        let dist: f64 = states[k]
            .iter()
            .zip(&states[e])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if dist > 2.0 * speed * (times[k] - times[e]) + 1e-9 {
            return Some(format!(
                "left the chart at t = {} and outgrew linear extrapolation at t = {}",
                times[e], times[k]
            ));
        }
    }
    None
}

/// `check_action`, full rank of `dμ`, and the completeness probe.
pub fn check_module(a: &ActionModel, opts: &CheckOptions) -> CheckReport {
    let mut rep = ReportBuilder::new("module", opts.tol);
    rep.absorb("action", &check_action(a, opts));
    let need = a.algebroid.base().dim();
    rep.declare("submersion");
    for p in a.total().samples(opts.samples, opts.seed) {
        match a.momentum.jacobian_at(&p) {
            Ok(d) => {
                let r = linalg::rank(&d);
                rep.flag_at("submersion", r == need, &p, || format!("rank dμ = {r}, need {need}"));
            }
            Err(e) => rep.observe_error("submersion", &e, &p),
        }
    }
    let probe = probe_completeness(&a.fields, a.total(), a.horizon, opts);
    let residual = if probe.status == Status::Pass { 0.0 } else { 1.0 };
    rep.status("completeness", probe.status, residual, Some(probe.note));
    rep.finish()
}

/// The action `e_i ↦ u_i` with `(u_i, e_i)` in the pullback fiber, which is
/// unique when that fiber meets `T_xX ⊕ 0` trivially.
pub fn unique_lift_action(a: Arc<LieAlgebroidModel>, j: &SmoothMap, opts: &CheckOptions) -> Result<ActionModel> {
    let x = j.source().clone();
    let n = a.base().dim();
    let m = x.dim();
    let mut points = x.samples(opts.samples, opts.seed);
    points.insert(0, x.center());
    for p in &points {
        let fiber = pullback_fiber(&a, j, p)?;
        let alpha_part = fiber.rows(m, fiber.nrows() - m).into_owned();
        let dim = fiber.ncols() - linalg::rank(&alpha_part);
        if dim > 0 {
            return Err(Error::IntersectionNontrivial { point: p.clone(), dim });
        }
        let r = linalg::rank(&j.jacobian_at(p)?);
        if r < n {
            return Err(Error::TransversalityFailed {
                point: p.clone(),
                rank: r,
                needed: n,
            });
        }
    }
    let rhs = (0..n)
        .map(|k| {
            (0..a.rank())
                .map(|i| j.pull(&a.anchor(i).comps()[k]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let sol = solve_at(&j.jacobian(), &rhs, &x.center())?;
    let fields = (0..a.rank())
        .map(|i| VectorField::new(x.clone(), sol.x.iter().map(|row| row[i].clone()).collect()))
        .collect::<Result<Vec<_>>>()?;
    let action = ActionModel::new(a, j.clone(), fields, Side::Right)?;
    let report = check_action(&action, opts);
    if report.detail("compatibility").is_some_and(|d| d.status != Status::Pass) {
        return Err(Error::UniquenessFailure(format!(
            "lifted fields miss the anchor by {:e}",
            report.residual
        )));
    }
    Ok(action)
}

/// A user-supplied chart for a leaf space `X/𝓕` with projection and section.
#[derive(Debug, Clone)]
pub struct QuotientChartModel {
    projection: SmoothMap,
    section: SmoothMap,
}

impl QuotientChartModel {
    pub fn new(projection: SmoothMap, section: SmoothMap) -> Result<Self> {
        projection.source().ensure_same(section.target())?;
        projection.target().ensure_same(section.source())?;
        Ok(QuotientChartModel { projection, section })
    }

    pub fn total(&self) -> &Chart {
        self.projection.source()
    }

    pub fn leaf(&self) -> &Chart {
        self.projection.target()
    }

    pub fn projection(&self) -> &SmoothMap {
        &self.projection
    }

    pub fn section(&self) -> &SmoothMap {
        &self.section
    }

    /// `π ∘ σ = id` on the leaf chart and `dπ` of full rank on the total chart.
    pub fn validate(&self, opts: &CheckOptions) -> CheckReport {
        let mut rep = ReportBuilder::new("quotient", opts.tol);
        let need = self.leaf().dim();
        rep.declare("section");
        for l in self.leaf().samples(opts.samples, opts.seed) {
            match self.section.eval(&l).and_then(|x| self.projection.eval(&x)) {
                Ok(back) => {
                    let gap = back.iter().zip(&l).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    rep.observe("section", gap, &l);
                }
                Err(e) => rep.observe_error("section", &e, &l),
            }
        }
        rep.declare("submersion");
        for x in self.total().samples(opts.samples, opts.seed) {
            match self.projection.jacobian_at(&x) {
                Ok(d) => {
                    let r = linalg::rank(&d);
                    rep.flag_at("submersion", r == need, &x, || format!("rank dπ = {r}, need {need}"));
                }
                Err(e) => rep.observe_error("submersion", &e, &x),
            }
        }
        rep.finish()
    }
}

/// Pushes the fields of `a` through `π`, checking fiber independence first.
///
/// The projected action has momentum `μ ∘ σ` and fields `dπ(X_i) ∘ σ`.
pub fn project_action(a: &ActionModel, q: &QuotientChartModel, opts: &CheckOptions) -> Result<ActionModel> {
    a.total().ensure_same(q.total())?;
    let pi = &q.projection;
    let sigma = &q.section;
    for x in q.total().samples(opts.samples, opts.seed) {
        let base = sigma.eval(&pi.eval(&x)?)?;
        let (dx, db) = (pi.jacobian_at(&x)?, pi.jacobian_at(&base)?);
        for (i, f) in a.fields.iter().enumerate() {
            let gap = (&dx * f.eval(&x)? - &db * f.eval(&base)?).amax();
            if !(gap < opts.tol) {
                return Err(Error::ProjectionIllDefined {
                    field: i + 1,
                    residual: gap,
                });
            }
        }
    }
    let jac = pi.jacobian();
    let leaf = q.leaf().clone();
    let fields = a
        .fields
        .iter()
        .map(|f| {
            let comps = jac
                .iter()
                .map(|row| {
                    let parts: Vec<Expr> = row.iter().zip(f.comps()).map(|(d, v)| d.mul(v)).collect();
                    sigma.pull(&Expr::sum(parts.iter()))
                })
                .collect::<Result<Vec<_>>>()?;
            VectorField::new(leaf.clone(), comps)
        })
        .collect::<Result<Vec<_>>>()?;
    let momentum = a.momentum.after(sigma)?;
    ActionModel::new(a.algebroid.clone(), momentum, fields, a.side).map(|m| m.with_horizon(a.horizon))
}

/// Leaf-space action: fiber independence of `dπ(X_i)`, leaves equal to the
/// momentum fibers, and the action axioms of the projected fields.
pub fn leaf_action_check(a: &ActionModel, q: &QuotientChartModel, opts: &CheckOptions) -> Result<CheckReport> {
    let projected = project_action(a, q, opts)?;
    let mut rep = ReportBuilder::new("leaf_action", opts.tol);
    rep.absorb("quotient", &q.validate(opts));
    rep.declare("leaves_match");
    for x in q.total().samples(opts.samples, opts.seed) {
        let kp = linalg::null_space(&q.projection.jacobian_at(&x)?);
        let kj = linalg::null_space(&a.momentum.jacobian_at(&x)?);
        let cmp = linalg::compare_spans(&kp, &kj);
        rep.observe("leaves_match", cmp.defect(), &x);
    }
    rep.absorb("projected_action", &check_action(&projected, opts));
    Ok(rep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{parse_expr, Bivector, ChartDomain};

    fn chart(n: usize) -> Chart {
        ChartDomain::cube(format!("R{n}"), n, -1.0, 1.0).unwrap()
    }

    fn vf(c: &Chart, comps: &[&str]) -> VectorField {
        let e = comps.iter().map(|s| parse_expr(s, c.dim()).unwrap()).collect();
        VectorField::new(c.clone(), e).unwrap()
    }

    fn map(src: &Chart, tgt: &Chart, comps: &[&str]) -> SmoothMap {
        let e = comps.iter().map(|s| parse_expr(s, src.dim()).unwrap()).collect();
        SmoothMap::new(src.clone(), tgt.clone(), e).unwrap()
    }

    fn opts() -> CheckOptions {
        CheckOptions::default()
    }

    fn planar_cotangent() -> Arc<LieAlgebroidModel> {
        let c = chart(2);
        let pi = Bivector::new(c, vec![Expr::one()]).unwrap();
        Arc::new(LieAlgebroidModel::cotangent("A", &pi, &opts()).unwrap())
    }

    #[test]
    fn tangent_action_on_identity() {
        let c = chart(2);
        let t = Arc::new(LieAlgebroidModel::tangent("T", c.clone()));
        let fields = (0..2).map(|i| VectorField::coordinate(c.clone(), i)).collect();
        let a = ActionModel::new(t, SmoothMap::identity(c), fields, Side::Right).unwrap();
        assert!(check_action(&a, &opts()).passed());
        assert!(check_module(&a, &opts()).passed());
    }

    #[test]
    fn poisson_map_action_and_sign_flip() {
        // X(α) = −Π♯(μ*α) on Q = R², μ = id: a left action.
        let a = planar_cotangent();
        let c = a.base().clone();
        let fields = vec![vf(&c, &["0", "1"]), vf(&c, &["-1", "0"])];
        let act = ActionModel::new(a.clone(), SmoothMap::identity(c.clone()), fields, Side::Left).unwrap();
        assert!(check_action(&act, &opts()).passed());

        let flipped = vec![vf(&c, &["0", "1"]), vf(&c, &["1", "0"])];
        let bad = ActionModel::new(a, SmoothMap::identity(c), flipped, Side::Left).unwrap();
        let r = check_action(&bad, &opts());
        let d = r.detail("compatibility").unwrap();
        assert_eq!(d.status, Status::Fail);
        assert!((d.residual - 2.0).abs() < 1e-12);
    }

    #[test]
    fn module_failures() {
        let c2 = chart(2);
        let t = Arc::new(LieAlgebroidModel::tangent("T", c2.clone()));
        let constant = map(&c2, &c2, &["0", "0"]);
        let zero = vec![VectorField::zero(c2.clone()); 2];
        let a = ActionModel::new(t, constant, zero, Side::Right).unwrap();
        let r = check_module(&a, &opts());
        assert_eq!(r.detail("submersion").unwrap().status, Status::Fail);

        let c1 = chart(1);
        let t1 = Arc::new(LieAlgebroidModel::tangent("T1", c1.clone()));
        // Not an action of the tangent algebroid, but the probe only sees the field.
        let blow = ActionModel::new(
            t1,
            SmoothMap::identity(c1.clone()),
            vec![vf(&c1, &["x1^2"])],
            Side::Right,
        )
        .unwrap();
        let r = check_module(&blow, &opts());
        assert_eq!(r.detail("completeness").unwrap().status, Status::Fail);
    }

    #[test]
    fn probe_classification() {
        let c = chart(2);
        let constant = vf(&c, &["1", "-2"]);
        let p = probe_completeness(&[constant], &c, 10.0, &opts());
        assert_eq!(p.status, Status::Pass);
        let linear = vf(&c, &["x1", "0"]);
        let p = probe_completeness(&[linear], &c, 10.0, &opts());
        assert_eq!(p.status, Status::Inconclusive);
        let rotation = vf(&c, &["-x2", "x1"]);
        let p = probe_completeness(&[rotation], &c, 10.0, &opts());
        assert_ne!(p.status, Status::Fail);
    }

    #[test]
    fn unique_lifts() {
        let c2 = chart(2);
        let t2 = Arc::new(LieAlgebroidModel::tangent("T", c2.clone()));
        let a = unique_lift_action(t2.clone(), &SmoothMap::identity(c2.clone()), &opts()).unwrap();
        assert_eq!(a.fields()[0], VectorField::coordinate(c2.clone(), 0));

        let c4 = chart(4);
        let pr1 = map(&c4, &c2, &["x1", "x2"]);
        assert!(matches!(
            unique_lift_action(t2, &pr1, &opts()),
            Err(Error::IntersectionNontrivial { dim: 2, .. })
        ));

        let c1 = chart(1);
        let big = ChartDomain::cube("R1big", 1, -2.0, 2.0).unwrap();
        let t1 = Arc::new(LieAlgebroidModel::tangent("T1", big.clone()));
        let double = map(&c1, &big, &["2*x1"]);
        let a = unique_lift_action(t1, &double, &opts()).unwrap();
        assert_eq!(a.fields()[0].comps(), &[Expr::rational(1, 2)]);
    }

    fn quotient() -> QuotientChartModel {
        let c3 = chart(3);
        let c2 = chart(2);
        QuotientChartModel::new(map(&c3, &c2, &["x1", "x2"]), map(&c2, &c3, &["x1", "x2", "0"])).unwrap()
    }

    #[test]
    fn leaf_actions() {
        let c3 = chart(3);
        let c2 = chart(2);
        let t2 = Arc::new(LieAlgebroidModel::tangent("T", c2.clone()));
        let j = map(&c3, &c2, &["x1", "x2"]);
        let q = quotient();

        let plain = ActionModel::new(
            t2.clone(),
            j.clone(),
            vec![vf(&c3, &["1", "0", "0"]), vf(&c3, &["0", "1", "0"])],
            Side::Right,
        )
        .unwrap();
        assert!(leaf_action_check(&plain, &q, &opts()).unwrap().passed());

        let stretched = ActionModel::new(
            t2.clone(),
            j.clone(),
            vec![vf(&c3, &["1", "0", "x3"]), vf(&c3, &["0", "1", "0"])],
            Side::Right,
        )
        .unwrap();
        let r = leaf_action_check(&stretched, &q, &opts()).unwrap();
        assert!(r.detail("projected_action.compatibility").unwrap().status == Status::Pass);

        let sheared = ActionModel::new(
            t2,
            j,
            vec![vf(&c3, &["1", "x3", "0"]), vf(&c3, &["0", "1", "0"])],
            Side::Right,
        )
        .unwrap();
        assert!(matches!(
            leaf_action_check(&sheared, &q, &opts()),
            Err(Error::ProjectionIllDefined { field: 1, .. })
        ));
    }

    mod frame_change {
        use super::*;
        use proptest::prelude::*;

        fn model() -> Arc<LieAlgebroidModel> {
            let c = chart(2);
            let pi = Bivector::new(c, vec![parse_expr("x1*x2 + 1", 2).unwrap()]).unwrap();
            Arc::new(LieAlgebroidModel::cotangent("A", &pi, &opts()).unwrap())
        }

        fn actions(a: &Arc<LieAlgebroidModel>) -> (ActionModel, ActionModel) {
            let c = a.base().clone();
            let good: Vec<VectorField> = a.anchors().iter().map(VectorField::neg).collect();
            let mut bad = good.clone();
            bad[1] = bad[1].neg();
            let mk = |f| ActionModel::new(a.clone(), SmoothMap::identity(c.clone()), f, Side::Left).unwrap();
            (mk(good), mk(bad))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            #[test]
            fn status_is_frame_independent(c0 in -2i64..=2, c1 in -2i64..=2, c2 in -2i64..=2, c3 in -1i64..=1) {
                let a = model();
                let entry = parse_expr(&format!("{c0} + {c1}*x1 + {c2}*x2 + {c3}*x1*x2^2", ), 2).unwrap();
                let g = vec![vec![Expr::one(), Expr::zero()], vec![entry, Expr::one()]];
                let b = Arc::new(a.change_frame("A'", &g).unwrap());
                prop_assert!(crate::algebroid::check_algebroid_axioms(&b, &opts()).passed());
                let (good, bad) = actions(&a);
                for act in [good, bad] {
                    let before = check_action(&act, &opts()).status;
                    let after = check_action(&act.change_frame(b.clone(), &g).unwrap(), &opts()).status;
                    prop_assert_eq!(before, after);
                }
            }
        }
    }
}
