//! Bimodule witnesses of Morita equivalence and the tensor distribution.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{check_action, probe_completeness, ActionModel, QuotientChartModel, Side};
use crate::algebroid::LieAlgebroidModel;
use crate::calculus::{lie_bracket_vf, Bivector, Chart, Coeff, Expr, OneForm, SmoothMap, VectorField};
use crate::error::{Error, Result};
use crate::linalg;
use crate::report::{CheckOptions, CheckReport, ReportBuilder, Status};

/// `X` with a left `A1`-action along `J1` and a right `A2`-action along `J2`.
#[derive(Debug, Clone)]
pub struct MoritaWitness {
    left: ActionModel,
    right: ActionModel,
    horizon: f64,
}

impl MoritaWitness {
    pub fn new(left: ActionModel, right: ActionModel) -> Result<Self> {
        left.total().ensure_same(right.total())?;
        if left.side() != Side::Left || right.side() != Side::Right {
            return Err(Error::shape("witness needs a left action and a right action"));
        }
        let horizon = left.horizon().min(right.horizon());
        Ok(MoritaWitness { left, right, horizon })
    }

    /// Dual pair of Poisson maps out of a symplectic chart: both actions are
    /// `e_i ↦ −Π_S♯(d J_i)`, for cotangent algebroids in their coordinate frame.
    pub fn from_dual_pair(
        pi_s: &Bivector,
        j1: SmoothMap,
        j2: SmoothMap,
        a1: Arc<LieAlgebroidModel>,
        a2: Arc<LieAlgebroidModel>,
    ) -> Result<Self> {
        let hamiltonians = |j: &SmoothMap| -> Result<Vec<VectorField>> {
            j.comps()
                .iter()
                .map(|c| {
                    let df = OneForm::new(
                        pi_s.chart().clone(),
                        (0..pi_s.chart().dim()).map(|i| c.diff(i)).collect(),
                    )?;
                    Ok(pi_s.sharp(&df)?.neg())
                })
                .collect()
        };
        let left = ActionModel::new(a1, j1.clone(), hamiltonians(&j1)?, Side::Left)?;
        let right = ActionModel::new(a2, j2.clone(), hamiltonians(&j2)?, Side::Right)?;
        MoritaWitness::new(left, right)
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn total(&self) -> &Chart {
        self.left.total()
    }

    pub fn left(&self) -> &ActionModel {
        &self.left
    }

    pub fn right(&self) -> &ActionModel {
        &self.right
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
}

fn full_rank(rep: &mut ReportBuilder, name: &str, j: &SmoothMap, points: &[Vec<f64>]) {
    let need = j.target().dim();
    rep.declare(name);
    for p in points {
        match j.jacobian_at(p) {
            Ok(d) => {
                let r = linalg::rank(&d);
                rep.flag_at(name, r == need, p, || format!("rank {r}, need {need}"));
            }
            Err(e) => rep.observe_error(name, &e, p),
        }
    }
}

fn kernel_spanned(rep: &mut ReportBuilder, name: &str, act: &ActionModel, j: &SmoothMap, points: &[Vec<f64>]) {
    rep.declare(name);
    for p in points {
        match act.fields_at(p).and_then(|f| Ok((f, j.jacobian_at(p)?))) {
            Ok((f, d)) => rep.observe(name, linalg::compare_spans(&f, &linalg::null_space(&d)).defect(), p),
            Err(e) => rep.observe_error(name, &e, p),
        }
    }
}

/// Both actions, full-rank momenta, and `span ξ1 = ker dJ2`, `span ξ2 = ker dJ1`.
///
/// The graph conditions that the Lagrangian-subbundle formulation also asks
/// for hold by construction of the witness and appear as derived flags.
pub fn check_quasi_equivalence(w: &MoritaWitness, opts: &CheckOptions) -> CheckReport {
    let mut rep = ReportBuilder::new("quasi_equivalence", opts.tol);
    rep.absorb("left_action", &check_action(&w.left, opts));
    rep.absorb("right_action", &check_action(&w.right, opts));
    let points = w.total().samples(opts.samples, opts.seed);
    full_rank(&mut rep, "j1_submersion", w.left.momentum(), &points);
    full_rank(&mut rep, "j2_submersion", w.right.momentum(), &points);
    kernel_spanned(&mut rep, "left_spans_ker_dj2", &w.left, w.right.momentum(), &points);
    kernel_spanned(&mut rep, "right_spans_ker_dj1", &w.right, w.left.momentum(), &points);
    rep.flag(
        "condition_a",
        true,
        Some("derived: actions are represented by their graphs".into()),
    );
    rep.flag(
        "condition_c",
        true,
        Some("derived: graphs contain the zero section".into()),
    );
    rep.finish()
}

/// Completeness of every field of both actions and vanishing of `[ξ1_i, ξ2_j]`.
pub fn check_strong_morita(w: &MoritaWitness, opts: &CheckOptions) -> CheckReport {
    let mut rep = ReportBuilder::new("strong_morita", opts.tol);
    let mut fields = w.left.fields().to_vec();
    fields.extend_from_slice(w.right.fields());
    let probe = probe_completeness(&fields, w.total(), w.horizon, opts);
    let residual = if probe.status == Status::Pass { 0.0 } else { 1.0 };
    rep.status("completeness", probe.status, residual, Some(probe.note));
    let points = w.total().samples(opts.samples, opts.seed);
    rep.declare("commutators");
    for a in w.left.fields() {
        for b in w.right.fields() {
            match lie_bracket_vf(a, b) {
                Ok(c) => rep.observe_exprs("commutators", c.comps(), &points),
                Err(e) => rep.status("commutators", Status::Error, 0.0, Some(e.to_string())),
            }
        }
    }
    rep.finish()
}

/// `f` regarded on `X × Y`, with `Y`'s coordinates shifted by `offset`.
fn lift_field(f: &VectorField, product: &Chart, offset: usize, sign: i64) -> Result<VectorField> {
    let subs: Vec<Expr> = (0..f.chart().dim()).map(|k| Expr::var(offset + k)).collect();
    let mut comps = vec![Expr::zero(); product.dim()];
    for (k, c) in f.comps().iter().enumerate() {
        comps[offset + k] = c.compose(&subs)?.scale(Coeff::int(sign));
    }
    VectorField::new(product.clone(), comps)
}

/// The distribution `{(ξ(α)_x, −η(α)_y)}` on `X × Y` at one point of the
/// fiber product.
#[derive(Debug, Clone)]
pub struct TensorDistribution {
    pub product: Chart,
    pub generators: Vec<VectorField>,
    /// Orthonormal basis of `D_(x,y)` as columns.
    pub basis: DMatrix<f64>,
    pub report: CheckReport,
}

impl TensorDistribution {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Generators, pointwise basis and involutivity of the tensor distribution for
/// a right action `xi` on `X` and a left action `eta` on `Y` of one algebroid.
pub fn tensor_distribution(
    xi: &ActionModel,
    eta: &ActionModel,
    x: &[f64],
    y: &[f64],
    opts: &CheckOptions,
) -> Result<TensorDistribution> {
    if xi.algebroid().label() != eta.algebroid().label() {
        return Err(Error::AlgebroidMismatch {
            expected: xi.algebroid().label().to_string(),
            found: eta.algebroid().label().to_string(),
        });
    }
    let jx = xi.momentum().eval(x)?;
    let ky = eta.momentum().eval(y)?;
    let gap = jx.iter().zip(&ky).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if !(gap <= opts.tol) {
        return Err(Error::BasePointMismatch(format!(
            "J(x) = {jx:?} and K(y) = {ky:?} differ by {gap:e}"
        )));
    }
    let product = xi.total().product(eta.total())?;
    let nx = xi.total().dim();
    let generators = xi
        .fields()
        .iter()
        .zip(eta.fields())
        .map(|(a, b)| lift_field(a, &product, 0, 1)?.add(&lift_field(b, &product, nx, -1)?))
        .collect::<Result<Vec<_>>>()?;
    let p: Vec<f64> = x.iter().chain(y).copied().collect();
    let at = |fs: &[VectorField]| -> Result<DMatrix<f64>> {
        let cols = fs.iter().map(|f| f.eval(&p)).collect::<Result<Vec<DVector<f64>>>>()?;
        Ok(if cols.is_empty() {
            DMatrix::zeros(product.dim(), 0)
        } else {
            DMatrix::from_columns(&cols)
        })
    };
    let span = at(&generators)?;
    let basis = linalg::column_basis(&span);
    let mut rep = ReportBuilder::new("tensor_distribution", opts.tol);
    rep.declare("involutivity");
    for i in 0..generators.len() {
        for j in i + 1..generators.len() {
            let b = lie_bracket_vf(&generators[i], &generators[j])?.eval(&p)?;
            rep.observe("involutivity", linalg::span_residual(&basis, &b), &p);
        }
    }
    let report = rep.finish();
    Ok(TensorDistribution {
        product,
        generators,
        basis,
        report,
    })
}

/// Data for composing an `(A1, A2)`-bimodule `X` with an `(A2, A3)`-bimodule `Y`.
///
/// `embedding` parametrizes the fiber product `X ×_{A2} Y` inside `X × Y`,
/// and `quotient` is a chart of its leaf space for the tensor distribution.
#[derive(Debug, Clone)]
pub struct BimoduleComposition {
    pub first: MoritaWitness,
    pub second: MoritaWitness,
    pub embedding: SmoothMap,
    pub quotient: QuotientChartModel,
}

/// On the leaf space: `D` lies in the fibers of `π`, and the induced outer
/// actions span the kernels of the induced momenta crosswise.
pub fn check_bimodule_composition(c: &BimoduleComposition, opts: &CheckOptions) -> Result<CheckReport> {
    let (x, y) = (c.first.total(), c.second.total());
    let (nx, ny) = (x.dim(), y.dim());
    let iota = &c.embedding;
    iota.source().ensure_same(c.quotient.total())?;
    if iota.target().dim() != nx + ny {
        return Err(Error::shape(format!(
            "embedding lands in dimension {}, expected {}",
            iota.target().dim(),
            nx + ny
        )));
    }
    let pr = |chart: &Chart, offset: usize| {
        SmoothMap::new(
            iota.target().clone(),
            chart.clone(),
            (0..chart.dim()).map(|k| Expr::var(offset + k)).collect(),
        )
    };
    let sigma = c.quotient.section();
    let on_leaves = |j: &SmoothMap, proj: SmoothMap| j.after(&proj.after(iota)?.after(sigma)?);
    let j1_hat = on_leaves(c.first.left.momentum(), pr(x, 0)?)?;
    let k3_hat = on_leaves(c.second.right.momentum(), pr(y, nx)?)?;

    let mut rep = ReportBuilder::new("bimodule_composition", opts.tol);
    rep.absorb("quotient", &c.quotient.validate(opts));
    for name in ["d_in_fibers", "involutivity", "ker_dj1_spanned", "ker_dk3_spanned"] {
        rep.declare(name);
    }
    for l in c.quotient.leaf().samples(opts.samples, opts.seed) {
        let p = sigma.eval(&l)?;
        let z = iota.eval(&p)?;
        let (zx, zy) = z.split_at(nx);
        let td = tensor_distribution(c.first.right(), c.second.left(), zx, zy, opts)?;
        rep.observe("involutivity", td.report.residual, &l);
        // Tangent vectors of X × Y pulled back to the fiber-product chart.
        let di = iota.jacobian_at(&p)?;
        let lift = di
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::SingularSystem(e.to_string()))?;
        let dpi = c.quotient.projection().jacobian_at(&p)?;
        let down = &dpi * &lift;
        rep.observe("d_in_fibers", (&down * &td.basis).amax(), &l);
        let push = |fields: &[VectorField], offset: usize, pt: &[f64]| -> Result<DMatrix<f64>> {
            let mut m = DMatrix::zeros(c.quotient.leaf().dim(), fields.len());
            for (i, f) in fields.iter().enumerate() {
                let mut v = DVector::zeros(nx + ny);
                v.rows_mut(offset, f.chart().dim()).copy_from(&f.eval(pt)?);
                m.set_column(i, &(&down * v));
            }
            Ok(m)
        };
        let xi1 = push(c.first.left.fields(), 0, zx)?;
        let eta3 = push(c.second.right.fields(), nx, zy)?;
        let kj1 = linalg::null_space(&j1_hat.jacobian_at(&l)?);
        let kk3 = linalg::null_space(&k3_hat.jacobian_at(&l)?);
        rep.observe("ker_dj1_spanned", linalg::compare_spans(&kj1, &eta3).defect(), &l);
        rep.observe("ker_dk3_spanned", linalg::compare_spans(&kk3, &xi1).defect(), &l);
    }
    Ok(rep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{parse_expr, ChartDomain};
    use crate::fixtures;

    fn opts() -> CheckOptions {
        CheckOptions::default()
    }

    fn map(src: &Chart, tgt: &Chart, comps: &[&str]) -> SmoothMap {
        let e = comps.iter().map(|s| parse_expr(s, src.dim()).unwrap()).collect();
        SmoothMap::new(src.clone(), tgt.clone(), e).unwrap()
    }

    #[test]
    fn dual_pair_witness() {
        let w = fixtures::dual_pair().unwrap();
        let x = w.total().clone();
        assert_eq!(
            w.left().fields()[0],
            VectorField::new(x.clone(), vec![Expr::zero(), Expr::one(), Expr::zero(), Expr::zero()]).unwrap()
        );
        let q = check_quasi_equivalence(&w, &opts());
        assert!(q.passed(), "{q:#?}");
        let s = check_strong_morita(&w, &opts());
        assert!(s.passed(), "{s:#?}");
    }

    #[test]
    fn coinciding_momenta_fail() {
        let w = fixtures::dual_pair().unwrap();
        let right = ActionModel::new(
            w.right().algebroid().clone(),
            w.left().momentum().clone(),
            w.right().fields().to_vec(),
            Side::Right,
        )
        .unwrap();
        let bad = MoritaWitness::new(w.left().clone(), right).unwrap();
        let r = check_quasi_equivalence(&bad, &opts());
        assert_eq!(r.detail("left_spans_ker_dj2").unwrap().status, Status::Fail);
        assert_eq!(r.detail("right_spans_ker_dj1").unwrap().status, Status::Pass);
        assert_eq!(r.status, Status::Fail);
    }

    #[test]
    fn points_with_rank_zero_algebroids() {
        let pt = ChartDomain::point("pt");
        let zero = Arc::new(LieAlgebroidModel::zero("O", pt.clone()));
        let c2 = ChartDomain::cube("R2", 2, -1.0, 1.0).unwrap();
        let to_pt = SmoothMap::new(c2.clone(), pt.clone(), vec![]).unwrap();
        let l = ActionModel::new(zero.clone(), to_pt.clone(), vec![], Side::Left).unwrap();
        let r = ActionModel::new(zero.clone(), to_pt, vec![], Side::Right).unwrap();
        let w = MoritaWitness::new(l, r).unwrap();
        assert_eq!(check_quasi_equivalence(&w, &opts()).status, Status::Fail);

        let id = SmoothMap::identity(pt.clone());
        let l = ActionModel::new(zero.clone(), id.clone(), vec![], Side::Left).unwrap();
        let r = ActionModel::new(zero, id, vec![], Side::Right).unwrap();
        let w = MoritaWitness::new(l, r).unwrap();
        assert!(check_quasi_equivalence(&w, &opts()).passed());
        assert!(check_strong_morita(&w, &opts()).passed());
    }

    #[test]
    fn perturbed_right_action_breaks_commutation() {
        let w = fixtures::dual_pair().unwrap();
        let x = w.total().clone();
        let mut fields = w.right().fields().to_vec();
        let bump = VectorField::new(x, vec![Expr::zero(), Expr::zero(), Expr::var(0), Expr::zero()]).unwrap();
        fields[0] = fields[0].add(&bump).unwrap();
        let right = ActionModel::new(
            w.right().algebroid().clone(),
            w.right().momentum().clone(),
            fields,
            Side::Right,
        )
        .unwrap();
        let bad = MoritaWitness::new(w.left().clone(), right).unwrap();
        let r = check_strong_morita(&bad, &opts());
        assert_eq!(r.detail("commutators").unwrap().status, Status::Fail);
    }

    #[test]
    fn tensor_distribution_of_dual_pair_with_its_opposite() {
        let w = fixtures::dual_pair().unwrap();
        let y = fixtures::dual_pair_opposite(&w).unwrap();
        let x0 = [0.1, 0.2, 0.3, -0.4];
        let y0 = [0.5, -0.5, 0.3, -0.4];
        let td = tensor_distribution(w.right(), y.left(), &x0, &y0, &opts()).unwrap();
        assert_eq!(td.dim(), 2);
        assert!(td.report.passed());
        assert_eq!(td.report.residual, 0.0);

        let far = [0.5, -0.5, 0.0, 0.0];
        assert!(matches!(
            tensor_distribution(w.right(), y.left(), &x0, &far, &opts()),
            Err(Error::BasePointMismatch(_))
        ));
    }

    #[test]
    fn rank_zero_tensor_distribution_is_trivial() {
        let pt = ChartDomain::point("pt");
        let zero = Arc::new(LieAlgebroidModel::zero("O", pt.clone()));
        let c1 = ChartDomain::cube("R1", 1, -1.0, 1.0).unwrap();
        let to_pt = SmoothMap::new(c1.clone(), pt, vec![]).unwrap();
        let a = ActionModel::new(zero.clone(), to_pt.clone(), vec![], Side::Right).unwrap();
        let b = ActionModel::new(zero, to_pt, vec![], Side::Left).unwrap();
        let td = tensor_distribution(&a, &b, &[0.0], &[0.5], &opts()).unwrap();
        assert_eq!(td.dim(), 0);
        assert_eq!(td.product.dim(), 2);
    }

    #[test]
    fn composition_with_opposite() {
        let w = fixtures::dual_pair().unwrap();
        let y = fixtures::dual_pair_opposite(&w).unwrap();
        let p = ChartDomain::cube("P", 6, -1.0, 1.0).unwrap();
        let xy = w.total().product(y.total()).unwrap();
        let l = ChartDomain::cube("L", 4, -1.0, 1.0).unwrap();
        let embedding = map(&p, &xy, &["x1", "x2", "x3", "x4", "x5", "x6", "x3", "x4"]);
        let quotient = QuotientChartModel::new(
            map(&p, &l, &["x1", "x2", "x5", "x6"]),
            map(&l, &p, &["x1", "x2", "0", "0", "x3", "x4"]),
        )
        .unwrap();
        let comp = BimoduleComposition {
            first: w,
            second: y,
            embedding,
            quotient,
        };
        let r = check_bimodule_composition(&comp, &opts()).unwrap();
        assert!(r.passed(), "{r:#?}");
    }
}
