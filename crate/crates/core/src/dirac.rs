//! Generalized tangent bundle `TM ⊕ T*M`: pairing, Courant bracket, Dirac
//! structures, gauge transformations and Dirac maps.
//!
//! The pairing is `⟨(X,α),(Y,β)⟩ = β(X) + α(Y)` without a factor ½, and the
//! bracket is `⟦(U,α),(V,β)⟧ = ([U,V], ℒ_Uβ − i_V dα)`. The bracket satisfies
//! `⟦s1,s2⟧ + ⟦s2,s1⟧ = (0, d⟨s1,s2⟩)`, so it is skew on isotropic pairs.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::action::{ActionModel, Side};
use crate::algebroid::LieAlgebroidModel;
use crate::calculus::cartan::{
    d_function, d_one_form, d_two_form, interior_two_form, lie_derivative_one_form, pullback_one_form,
};
use crate::calculus::solve::solve_at;
use crate::calculus::{lie_bracket_vf, Bivector, Chart, Expr, OneForm, ScalarField, SmoothMap, TwoForm, VectorField};
use crate::error::{Error, Result};
use crate::linalg;
use crate::report::{CheckOptions, CheckReport, ReportBuilder, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedSection {
    vector: VectorField,
    form: OneForm,
}

impl GeneralizedSection {
    pub fn new(vector: VectorField, form: OneForm) -> Result<Self> {
        vector.chart().ensure_same(form.chart())?;
        Ok(GeneralizedSection { vector, form })
    }

    pub fn zero(chart: Chart) -> Self {
        GeneralizedSection {
            vector: VectorField::zero(chart.clone()),
            form: OneForm::zero(chart),
        }
    }

    pub fn chart(&self) -> &Chart {
        self.vector.chart()
    }

    pub fn vector(&self) -> &VectorField {
        &self.vector
    }

    pub fn form(&self) -> &OneForm {
        &self.form
    }

    pub fn is_zero(&self) -> bool {
        self.vector.is_zero() && self.form.is_zero()
    }

    /// `(X(p), α(p))` stacked into one vector of length `2n`.
    pub fn eval(&self, p: &[f64]) -> Result<DVector<f64>> {
        let v = self.vector.eval(p)?;
        let a = self.form.eval(p)?;
        Ok(DVector::from_iterator(
            v.len() + a.len(),
            v.iter().chain(a.iter()).copied(),
        ))
    }

    pub fn add(&self, other: &GeneralizedSection) -> Result<GeneralizedSection> {
        Ok(GeneralizedSection {
            vector: self.vector.add(&other.vector)?,
            form: self.form.add(&other.form)?,
        })
    }

    pub fn scale(&self, f: &Expr) -> GeneralizedSection {
        GeneralizedSection {
            vector: self.vector.scale(f),
            form: self.form.scale(f),
        }
    }
}

pub fn pairing(s1: &GeneralizedSection, s2: &GeneralizedSection) -> Result<ScalarField> {
    s1.chart().ensure_same(s2.chart())?;
    let e = s2.form.pair(&s1.vector)?.add(&s1.form.pair(&s2.vector)?);
    ScalarField::new(s1.chart().clone(), e)
}

pub fn courant_bracket(s1: &GeneralizedSection, s2: &GeneralizedSection) -> Result<GeneralizedSection> {
    s1.chart().ensure_same(s2.chart())?;
    let vector = lie_bracket_vf(&s1.vector, &s2.vector)?;
    let form =
        lie_derivative_one_form(&s1.vector, &s2.form)?.sub(&interior_two_form(&s2.vector, &d_one_form(&s1.form))?)?;
    GeneralizedSection::new(vector, form)
}

/// A rank-`n` subbundle of `TM ⊕ T*M` given by a frame of `n` sections.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracStructureModel {
    label: String,
    chart: Chart,
    frame: Vec<GeneralizedSection>,
    certified: bool,
}

impl DiracStructureModel {
    pub fn new(label: impl Into<String>, chart: Chart, frame: Vec<GeneralizedSection>) -> Result<Self> {
        if frame.len() != chart.dim() {
            return Err(Error::RankMismatch(format!(
                "{} frame sections on a chart of dimension {}",
                frame.len(),
                chart.dim()
            )));
        }
        for s in &frame {
            chart.ensure_same(s.chart())?;
        }
        Ok(DiracStructureModel {
            label: label.into(),
            chart,
            frame,
            certified: false,
        })
    }

    /// Frame `(Π♯dx_i, dx_i)`.
    pub fn graph_of_bivector(label: impl Into<String>, pi: &Bivector) -> Result<Self> {
        let chart = pi.chart().clone();
        let frame = (0..chart.dim())
            .map(|i| {
                let dx = OneForm::coordinate(chart.clone(), i);
                GeneralizedSection::new(pi.sharp(&dx)?, dx)
            })
            .collect::<Result<Vec<_>>>()?;
        DiracStructureModel::new(label, chart, frame)
    }

    /// Frame `(∂_i, i_{∂_i} B)`.
    pub fn graph_of_two_form(label: impl Into<String>, b: &TwoForm) -> Result<Self> {
        let chart = b.chart().clone();
        let frame = (0..chart.dim())
            .map(|i| {
                let v = VectorField::coordinate(chart.clone(), i);
                let form = interior_two_form(&v, b)?;
                GeneralizedSection::new(v, form)
            })
            .collect::<Result<Vec<_>>>()?;
        DiracStructureModel::new(label, chart, frame)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn frame(&self) -> &[GeneralizedSection] {
        &self.frame
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Runs [`check_dirac`] and records whether it passed.
    pub fn certify(mut self, opts: &CheckOptions) -> (Self, CheckReport) {
        let report = check_dirac(&self, opts);
        self.certified = report.passed();
        (self, report)
    }

    /// The `2n × n` matrix of frame values at `p`.
    pub fn frame_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.chart.dim();
        let mut m = DMatrix::zeros(2 * n, n);
        for (a, s) in self.frame.iter().enumerate() {
            m.set_column(a, &s.eval(p)?);
        }
        Ok(m)
    }

    fn vector_rows(&self) -> Vec<Vec<Expr>> {
        let n = self.chart.dim();
        (0..n)
            .map(|k| self.frame.iter().map(|s| s.vector.comps()[k].clone()).collect())
            .collect()
    }

    fn form_rows(&self) -> Vec<Vec<Expr>> {
        let n = self.chart.dim();
        (0..n)
            .map(|k| self.frame.iter().map(|s| s.form.comps()[k].clone()).collect())
            .collect()
    }

    /// The Lie algebroid `D → M` with the restricted bracket and the
    /// projection to `TM` as anchor; requires a certified model.
    pub fn to_algebroid(&self) -> Result<LieAlgebroidModel> {
        if !self.certified {
            return Err(Error::DiracNotCertified(self.label.clone()));
        }
        let n = self.chart.dim();
        let mut a = self.vector_rows();
        a.extend(self.form_rows());
        let mut pairs = Vec::new();
        let mut b = vec![Vec::new(); 2 * n];
        for i in 0..n {
            for j in i + 1..n {
                let br = courant_bracket(&self.frame[i], &self.frame[j])?;
                for (row, e) in b.iter_mut().zip(br.vector.comps().iter().chain(br.form.comps())) {
                    row.push(e.clone());
                }
                pairs.push((i, j));
            }
        }
        let structure = if pairs.is_empty() {
            Vec::new()
        } else {
            solve_at(&a, &b, &self.chart.center())?.x
        };
        let anchor = self.frame.iter().map(|s| s.vector.clone()).collect();
        LieAlgebroidModel::from_frame(self.label.clone(), self.chart.clone(), anchor, |i, j| {
            let col = pairs.iter().position(|&p| p == (i, j)).expect("pair enumerated above");
            structure.iter().map(|row| row[col].clone()).collect()
        })
    }
}

fn frame_brackets(d: &DiracStructureModel) -> Result<Vec<GeneralizedSection>> {
    let n = d.frame.len();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(courant_bracket(&d.frame[i], &d.frame[j])?);
            }
        }
    }
    Ok(out)
}

fn span_gap(frame: &DMatrix<f64>, brackets: &[GeneralizedSection], p: &[f64]) -> Result<f64> {
    let q = linalg::column_basis(frame);
    brackets
        .iter()
        .map(|b| Ok(linalg::span_residual(&q, &b.eval(p)?)))
        .try_fold(0.0, |acc, r: Result<f64>| Ok(f64::max(acc, r?)))
}

/// Largest distance of a frame bracket from the pointwise span of the frame.
pub fn involutivity_residual_at(d: &DiracStructureModel, p: &[f64]) -> Result<f64> {
    span_gap(&d.frame_at(p)?, &frame_brackets(d)?, p)
}

/// Isotropy, rank `n`, and closure of the frame under the Courant bracket.
pub fn check_dirac(d: &DiracStructureModel, opts: &CheckOptions) -> CheckReport {
    let mut rep = ReportBuilder::new("dirac", opts.tol);
    let points = d.chart.samples(opts.samples, opts.seed);
    let n = d.frame.len();
    rep.declare("isotropy");
    for i in 0..n {
        for j in i..n {
            match pairing(&d.frame[i], &d.frame[j]) {
                Ok(f) => rep.observe_exprs("isotropy", std::slice::from_ref(f.expr()), &points),
                Err(e) => rep.status("isotropy", Status::Error, 0.0, Some(e.to_string())),
            }
        }
    }
    rep.declare("rank");
    rep.declare("involutivity");
    let brackets = match frame_brackets(d) {
        Ok(b) => b,
        Err(e) => {
            rep.status("involutivity", Status::Error, 0.0, Some(e.to_string()));
            return rep.finish();
        }
    };
    for p in &points {
        let frame = match d.frame_at(p) {
            Ok(f) => f,
            Err(e) => {
                rep.observe_error("rank", &e, p);
                continue;
            }
        };
        let r = linalg::rank(&frame);
        rep.flag_at("rank", r == n, p, || format!("frame rank {r}, need {n}"));
        match span_gap(&frame, &brackets, p) {
            Ok(g) => rep.observe("involutivity", g, p),
            Err(e) => rep.observe_error("involutivity", &e, p),
        }
    }
    rep.finish()
}

/// `τ_B(D) = {(Y, β + i_Y B)}`; the report carries the closedness of `B`.
///
/// The result is uncertified; certify it again to use it downstream.
pub fn gauge_transform(
    d: &DiracStructureModel,
    b: &TwoForm,
    opts: &CheckOptions,
) -> Result<(DiracStructureModel, CheckReport)> {
    d.chart.ensure_same(b.chart())?;
    let frame = d
        .frame
        .iter()
        .map(|s| GeneralizedSection::new(s.vector.clone(), s.form.add(&interior_two_form(&s.vector, b)?)?))
        .collect::<Result<Vec<_>>>()?;
    let model = DiracStructureModel::new(format!("tau({})", d.label), d.chart.clone(), frame)?;
    let mut rep = ReportBuilder::new("gauge", opts.tol);
    rep.declare("closedness");
    let db = d_two_form(b);
    if !db.is_zero() {
        for p in d.chart.samples(opts.samples, opts.seed) {
            match db.eval_max_abs(&p) {
                Ok(r) => rep.observe("closedness", r, &p),
                Err(e) => rep.observe_error("closedness", &e, &p),
            }
        }
    }
    Ok((model, rep.finish()))
}

/// Largest span defect between the frames of two structures on one chart.
pub fn frame_span_residual(a: &DiracStructureModel, b: &DiracStructureModel, points: &[Vec<f64>]) -> Result<f64> {
    a.chart.ensure_same(&b.chart)?;
    points.iter().try_fold(0.0, |acc, p| {
        Ok(f64::max(
            acc,
            linalg::compare_spans(&a.frame_at(p)?, &b.frame_at(p)?).defect(),
        ))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiracMapMode {
    Forward,
    Strong,
}

/// `F: N → M` between Dirac structures `D_N` and `D_M`.
#[derive(Debug, Clone)]
pub struct DiracMapData {
    pub source: DiracStructureModel,
    pub target: DiracStructureModel,
    pub map: SmoothMap,
}

impl DiracMapData {
    pub fn new(source: DiracStructureModel, target: DiracStructureModel, map: SmoothMap) -> Result<Self> {
        source.chart.ensure_same(map.source())?;
        target.chart.ensure_same(map.target())?;
        Ok(DiracMapData { source, target, map })
    }
}

/// Forward: `{(dF U, β) : (U, dF*β) ∈ D_N}` equals `D_M` at `F(m)`.
/// Strong: additionally `ker dF ∩ (D_N ∩ TN) = 0`.
pub fn check_dirac_map(dm: &DiracMapData, mode: DiracMapMode, opts: &CheckOptions) -> CheckReport {
    let mut rep = ReportBuilder::new("dirac_map", opts.tol);
    rep.declare("forward");
    if mode == DiracMapMode::Strong {
        rep.declare("kernel_condition");
    }
    let (nn, nm) = (dm.source.chart.dim(), dm.target.chart.dim());
    for p in dm.source.chart.samples(opts.samples, opts.seed) {
        let step = || -> Result<(f64, usize)> {
            let fp = dm.map.eval(&p)?;
            let df = dm.map.jacobian_at(&p)?;
            let dn = dm.source.frame_at(&p)?;
            let v = dn.rows(0, nn).into_owned();
            let theta = dn.rows(nn, nn).into_owned();
            let k = linalg::null_space(&linalg::hstack(&theta, &(-df.transpose())));
            let mut image = DMatrix::zeros(2 * nm, k.ncols());
            for (c, col) in k.column_iter().enumerate() {
                let coeffs = col.rows(0, nn).into_owned();
                let beta = col.rows(nn, nm).into_owned();
                image.view_mut((0, c), (nm, 1)).copy_from(&(&df * &v * coeffs));
                image.view_mut((nm, c), (nm, 1)).copy_from(&beta);
            }
            let forward = linalg::compare_spans(&image, &dm.target.frame_at(&fp)?).defect();
            let vertical = &v * linalg::null_space(&theta);
            let meet = linalg::intersection_dim(&linalg::null_space(&df), &vertical);
            Ok((forward, meet))
        };
        match step() {
            Ok((forward, meet)) => {
                rep.observe("forward", forward, &p);
                if mode == DiracMapMode::Strong {
                    rep.flag_at("kernel_condition", meet == 0, &p, || {
                        format!("ker dF meets the vertical part of D_N in dimension {meet}")
                    });
                }
            }
            Err(e) => rep.observe_error("forward", &e, &p),
        }
    }
    rep.finish()
}

/// The right action `ζ` of `D_M` on `N` along `F`: `ζ(V_a, β_a)` is the unique
/// `Z` with `dF Z = V_a ∘ F` and `(Z, F*β_a) ∈ D_N`.
pub fn induced_dirac_action(dm: &DiracMapData, opts: &CheckOptions) -> Result<ActionModel> {
    let report = check_dirac_map(dm, DiracMapMode::Strong, opts);
    if !report.passed() {
        return Err(Error::NotCertifiedStrong(format!(
            "{} -> {}: residual {:e}",
            dm.source.label, dm.target.label, report.residual
        )));
    }
    let algebroid = Arc::new(dm.target.to_algebroid()?);
    let n = dm.source.chart.clone();
    let jac = dm.map.jacobian();
    let v = dm.source.vector_rows();
    let mut a = dm.source.form_rows();
    for row in &jac {
        a.push(
            (0..dm.source.frame.len())
                .map(|c| {
                    Expr::sum(
                        row.iter()
                            .zip(&v)
                            .map(|(d, vr)| d.mul(&vr[c]))
                            .collect::<Vec<_>>()
                            .iter(),
                    )
                })
                .collect(),
        );
    }
    let mut b = vec![Vec::new(); a.len()];
    for s in &dm.target.frame {
        let pulled = pullback_one_form(&dm.map, &s.form)?;
        let pushed = s
            .vector
            .comps()
            .iter()
            .map(|c| dm.map.pull(c))
            .collect::<Result<Vec<_>>>()?;
        for (row, e) in b.iter_mut().zip(pulled.comps().iter().chain(&pushed)) {
            row.push(e.clone());
        }
    }
    let sol = solve_at(&a, &b, &n.center()).map_err(|e| Error::UniquenessFailure(e.to_string()))?;
    let points = n.samples(opts.samples, opts.seed);
    for row in &sol.residual_rows {
        for e in row {
            for p in &points {
                let r = e.eval(p)?;
                if !(r.abs() < opts.tol) {
                    return Err(Error::UniquenessFailure(format!(
                        "lift equations inconsistent by {r:e} at {p:?}"
                    )));
                }
            }
        }
    }
    let fields = (0..dm.target.frame.len())
        .map(|col| {
            let comps = v
                .iter()
                .map(|vr| {
                    Expr::sum(
                        vr.iter()
                            .zip(&sol.x)
                            .map(|(e, xr)| e.mul(&xr[col]))
                            .collect::<Vec<_>>()
                            .iter(),
                    )
                })
                .collect();
            VectorField::new(n.clone(), comps)
        })
        .collect::<Result<Vec<_>>>()?;
    ActionModel::new(algebroid, dm.map.clone(), fields, Side::Right)
}

/// `d f` paired with nothing: the section `(0, df)`.
pub fn exact_section(chart: &Chart, f: &Expr) -> GeneralizedSection {
    GeneralizedSection {
        vector: VectorField::zero(chart.clone()),
        form: d_function(chart, f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::check_action;
    use crate::calculus::{parse_expr, ChartDomain};
    use proptest::prelude::*;

    fn chart(n: usize) -> Chart {
        ChartDomain::cube(format!("R{n}"), n, -1.0, 1.0).unwrap()
    }

    fn opts() -> CheckOptions {
        CheckOptions::with_tol(1e-10)
    }

    fn section(c: &Chart, v: &[&str], a: &[&str]) -> GeneralizedSection {
        let p = |s: &[&str]| s.iter().map(|e| parse_expr(e, c.dim()).unwrap()).collect::<Vec<_>>();
        GeneralizedSection::new(
            VectorField::new(c.clone(), p(v)).unwrap(),
            OneForm::new(c.clone(), p(a)).unwrap(),
        )
        .unwrap()
    }

    fn two_form(c: &Chart, upper: &[&str]) -> TwoForm {
        TwoForm::new(
            c.clone(),
            upper.iter().map(|e| parse_expr(e, c.dim()).unwrap()).collect(),
        )
        .unwrap()
    }

    fn bivector(c: &Chart, upper: &[&str]) -> Bivector {
        Bivector::new(
            c.clone(),
            upper.iter().map(|e| parse_expr(e, c.dim()).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn pairing_examples() {
        let c = chart(2);
        let val = |s1: &GeneralizedSection, s2: &GeneralizedSection| pairing(s1, s2).unwrap().expr().clone();
        assert_eq!(
            val(
                &section(&c, &["1", "0"], &["0", "0"]),
                &section(&c, &["0", "0"], &["1", "0"])
            ),
            Expr::one()
        );
        assert_eq!(
            val(
                &section(&c, &["1", "0"], &["0", "1"]),
                &section(&c, &["0", "1"], &["1", "0"])
            ),
            Expr::int(2)
        );
        let s = section(&c, &["1", "0"], &["0", "1"]);
        assert!(val(&s, &s).is_zero());
    }

    #[test]
    fn bracket_examples() {
        let c2 = chart(2);
        let z = courant_bracket(
            &section(&c2, &["1", "0"], &["0", "0"]),
            &section(&c2, &["0", "1"], &["0", "0"]),
        )
        .unwrap();
        assert!(z.is_zero());
        let b = courant_bracket(
            &section(&c2, &["1", "0"], &["0", "0"]),
            &section(&c2, &["0", "0"], &["0", "x1"]),
        )
        .unwrap();
        assert_eq!(b, section(&c2, &["0", "0"], &["0", "1"]));
        let c3 = chart(3);
        let b = courant_bracket(
            &section(&c3, &["0", "0", "1"], &["0", "0", "0"]),
            &section(&c3, &["1", "0", "0"], &["0", "x3", "0"]),
        )
        .unwrap();
        assert_eq!(b, section(&c3, &["0", "0", "0"], &["0", "1", "0"]));
    }

    #[test]
    fn graphs_certify() {
        let c2 = chart(2);
        let g = DiracStructureModel::graph_of_bivector("G", &bivector(&c2, &["1"])).unwrap();
        assert!(check_dirac(&g, &opts()).passed());
        let h = DiracStructureModel::graph_of_two_form("H", &two_form(&c2, &["1"])).unwrap();
        assert!(check_dirac(&h, &opts()).passed());
        assert!(matches!(g.to_algebroid(), Err(Error::DiracNotCertified(_))));
    }

    #[test]
    fn nonclosed_graph_fails_involutivity() {
        let c3 = chart(3);
        let d = DiracStructureModel::graph_of_two_form("H", &two_form(&c3, &["x3", "0", "0"])).unwrap();
        let r = check_dirac(&d, &opts());
        assert_eq!(r.detail("isotropy").unwrap().status, Status::Pass);
        assert_eq!(r.detail("rank").unwrap().status, Status::Pass);
        assert_eq!(r.detail("involutivity").unwrap().status, Status::Fail);
        // ⟦s1,s2⟧ = (0, dx3) is orthogonal to every frame column.
        for p in c3.samples(16, 3) {
            assert!((involutivity_residual_at(&d, &p).unwrap() - 1.0).abs() < 1e-12);
        }
        let s3 = &d.frame()[2];
        let s1 = &d.frame()[0];
        let b = courant_bracket(s3, s1).unwrap();
        assert_eq!(b, section(&c3, &["0", "0", "0"], &["0", "1", "0"]));
        let p = [0.2, -0.4, 0.5];
        let gap = span_gap(&d.frame_at(&p).unwrap(), &[b], &p).unwrap();
        assert!((gap - 1.0 / (1.0f64 + 0.25).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gauge_examples() {
        let c2 = chart(2);
        let g = DiracStructureModel::graph_of_bivector("G", &bivector(&c2, &["1"])).unwrap();
        let (same, rep) = gauge_transform(&g, &TwoForm::zero(c2.clone()), &opts()).unwrap();
        assert_eq!(same.frame(), g.frame());
        assert!(rep.passed());

        let zero = DiracStructureModel::graph_of_bivector("Z", &Bivector::zero(c2.clone())).unwrap();
        let (moved, _) = gauge_transform(&zero, &two_form(&c2, &["x1"]), &opts()).unwrap();
        assert_eq!(moved.frame(), zero.frame());

        let b = two_form(&c2, &["1"]);
        let b2 = two_form(&c2, &["2"]);
        let (once, _) = gauge_transform(&g, &b2, &opts()).unwrap();
        let (twice, _) = gauge_transform(&once, &b, &opts()).unwrap();
        let (sum, _) = gauge_transform(&g, &b.add(&b2).unwrap(), &opts()).unwrap();
        let pts = c2.samples(16, 0);
        assert!(frame_span_residual(&twice, &sum, &pts).unwrap() < 1e-10);
    }

    #[test]
    fn nonclosed_gauge_is_flagged() {
        let c3 = chart(3);
        let g = DiracStructureModel::graph_of_bivector("Z", &Bivector::zero(c3.clone())).unwrap();
        let (_, rep) = gauge_transform(&g, &two_form(&c3, &["x3", "0", "0"]), &opts()).unwrap();
        assert_eq!(rep.status, Status::Fail);
    }

    fn dual_pair_map() -> DiracMapData {
        let c4 = chart(4);
        let c2 = chart(2);
        let src =
            DiracStructureModel::graph_of_bivector("S", &bivector(&c4, &["1", "0", "0", "0", "0", "-1"])).unwrap();
        let tgt = DiracStructureModel::graph_of_bivector("T", &bivector(&c2, &["1"])).unwrap();
        let (tgt, _) = tgt.certify(&opts());
        let f = SmoothMap::new(c4, c2, vec![Expr::var(0), Expr::var(1)]).unwrap();
        DiracMapData::new(src, tgt, f).unwrap()
    }

    #[test]
    fn dirac_maps() {
        let c2 = chart(2);
        let g = DiracStructureModel::graph_of_bivector("G", &bivector(&c2, &["1"])).unwrap();
        let id = DiracMapData::new(g.clone(), g.clone(), SmoothMap::identity(c2.clone())).unwrap();
        assert!(check_dirac_map(&id, DiracMapMode::Forward, &opts()).passed());
        assert!(check_dirac_map(&id, DiracMapMode::Strong, &opts()).passed());

        assert!(check_dirac_map(&dual_pair_map(), DiracMapMode::Strong, &opts()).passed());

        let c1 = chart(1);
        let z2 = DiracStructureModel::graph_of_bivector("Z2", &Bivector::zero(c2.clone())).unwrap();
        let z1 = DiracStructureModel::graph_of_bivector("Z1", &Bivector::zero(c1.clone())).unwrap();
        let pr = SmoothMap::new(c2.clone(), c1, vec![Expr::var(0)]).unwrap();
        let dm = DiracMapData::new(z2, z1, pr).unwrap();
        assert!(check_dirac_map(&dm, DiracMapMode::Strong, &opts()).passed());

        // Graph of zero two-form is TM; pr1 then has a vertical kernel.
        let t2 = DiracStructureModel::graph_of_two_form("T2", &TwoForm::zero(c2.clone())).unwrap();
        let t1 = DiracStructureModel::graph_of_two_form("T1", &TwoForm::zero(chart(1))).unwrap();
        let pr = SmoothMap::new(c2, chart(1), vec![Expr::var(0)]).unwrap();
        let dm = DiracMapData::new(t2, t1, pr).unwrap();
        assert!(check_dirac_map(&dm, DiracMapMode::Forward, &opts()).passed());
        assert!(!check_dirac_map(&dm, DiracMapMode::Strong, &opts()).passed());
    }

    #[test]
    fn induced_action_on_dual_pair() {
        let dm = dual_pair_map();
        let act = induced_dirac_action(&dm, &opts()).unwrap();
        let c4 = dm.source.chart().clone();
        let expected = VectorField::new(c4, vec![Expr::zero(), Expr::int(-1), Expr::zero(), Expr::zero()]).unwrap();
        assert_eq!(act.fields()[0], expected);
        assert!(check_action(&act, &CheckOptions::default()).passed());
        let zero = act.field_of(&[Expr::zero(), Expr::zero()]).unwrap();
        assert!(zero.is_zero());

        let c2 = chart(2);
        let g = DiracStructureModel::graph_of_bivector("G", &bivector(&c2, &["1"])).unwrap();
        let (g, _) = g.certify(&opts());
        let id = DiracMapData::new(g.clone(), g.clone(), SmoothMap::identity(c2)).unwrap();
        let act = induced_dirac_action(&id, &opts()).unwrap();
        for (z, s) in act.fields().iter().zip(g.frame()) {
            assert_eq!(z, s.vector());
        }
    }

    #[test]
    fn uncertified_target_and_weak_maps_are_rejected() {
        let mut dm = dual_pair_map();
        dm.target.certified = false;
        assert!(matches!(
            induced_dirac_action(&dm, &opts()),
            Err(Error::DiracNotCertified(_))
        ));
        let c2 = chart(2);
        let t2 = DiracStructureModel::graph_of_two_form("T2", &TwoForm::zero(c2.clone())).unwrap();
        let t1 = DiracStructureModel::graph_of_two_form("T1", &TwoForm::zero(chart(1))).unwrap();
        let (t1, _) = t1.certify(&opts());
        let pr = SmoothMap::new(c2, chart(1), vec![Expr::var(0)]).unwrap();
        let dm = DiracMapData::new(t2, t1, pr).unwrap();
        assert!(matches!(
            induced_dirac_action(&dm, &opts()),
            Err(Error::NotCertifiedStrong(_))
        ));
    }

    #[test]
    fn algebroid_of_linear_graph() {
        let c2 = chart(2);
        let pi = bivector(&c2, &["x1"]);
        let (g, rep) = DiracStructureModel::graph_of_bivector("G", &pi)
            .unwrap()
            .certify(&opts());
        assert!(rep.passed());
        let a = g.to_algebroid().unwrap();
        let cot = LieAlgebroidModel::cotangent("G", &pi, &opts()).unwrap();
        assert_eq!(a.structure(0, 1), cot.structure(0, 1));
    }

    fn poly() -> impl Strategy<Value = String> {
        let mono = prop_oneof![
            Just("1"),
            Just("x1"),
            Just("x2"),
            Just("x3"),
            Just("x1*x2"),
            Just("x2*x3"),
            Just("x1^2"),
            Just("x3^2*x1"),
        ];
        proptest::collection::vec((-2i32..=2, mono), 1..=3).prop_map(|ts| {
            ts.into_iter()
                .map(|(c, m)| format!("({c})*{m}"))
                .collect::<Vec<_>>()
                .join(" + ")
        })
    }

    fn sec3() -> impl Strategy<Value = GeneralizedSection> {
        proptest::collection::vec(poly(), 6).prop_map(|v| {
            let c = chart(3);
            let s: Vec<&str> = v.iter().map(String::as_str).collect();
            section(&c, &s[..3], &s[3..])
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn pairing_symmetric_and_bracket_skew_up_to_exact(s1 in sec3(), s2 in sec3()) {
            let c = s1.chart().clone();
            prop_assert_eq!(pairing(&s1, &s2).unwrap(), pairing(&s2, &s1).unwrap());
            let sum = courant_bracket(&s1, &s2).unwrap().add(&courant_bracket(&s2, &s1).unwrap()).unwrap();
            let exact = exact_section(&c, pairing(&s1, &s2).unwrap().expr());
            prop_assert_eq!(sum, exact);
        }

        #[test]
        fn gauge_inverse_and_closed_preservation(beta in proptest::collection::vec(poly(), 3)) {
            let c = chart(3);
            let s: Vec<&str> = beta.iter().map(String::as_str).collect();
            let b = d_one_form(&OneForm::new(c.clone(), s.iter().map(|e| parse_expr(e, 3).unwrap()).collect()).unwrap());
            let g = DiracStructureModel::graph_of_bivector("G", &bivector(&c, &["1", "0", "0"])).unwrap();
            let (fwd, closed) = gauge_transform(&g, &b, &opts()).unwrap();
            prop_assert!(closed.passed());
            prop_assert!(check_dirac(&fwd, &opts()).passed());
            let (back, _) = gauge_transform(&fwd, &b.neg(), &opts()).unwrap();
            prop_assert_eq!(back.frame(), g.frame());
        }

        #[test]
        fn graph_certifies_iff_poisson(u in proptest::collection::vec(poly(), 3)) {
            let c = chart(3);
            let s: Vec<&str> = u.iter().map(String::as_str).collect();
            let pi = bivector(&c, &s);
            let dirac = check_dirac(&DiracStructureModel::graph_of_bivector("G", &pi).unwrap(), &CheckOptions::default()).passed();
            let poisson = LieAlgebroidModel::cotangent("G", &pi, &CheckOptions::default()).is_ok();
            prop_assert_eq!(dirac, poisson);
        }
    }
}
