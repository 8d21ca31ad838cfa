//! Lie algebroids over a chart in a global frame `e_1..e_r`.
//!
//! The bracket is generated by the structure functions
//! `⟦e_i, e_j⟧ = Σ_k c^k_ij e_k` and extended by the Leibniz rule, so Leibniz
//! holds by construction and only the frame identities need checking.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::calculus::cartan::{d_function, lie_bracket_vf, lie_derivative_one_form};
use crate::calculus::fields::upper_index;
use crate::calculus::solve::solve_at;
use crate::calculus::{Bivector, Chart, Expr, OneForm, SmoothMap, VectorField};
use crate::error::{Error, Result};
use crate::linalg;
use crate::report::{CheckOptions, CheckReport, ReportBuilder, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebroidModel {
    label: String,
    base: Chart,
    rank: usize,
    anchor: Vec<VectorField>,
    /// `structure[upper_index(r, i, j)][k] = c^k_ij` for `i < j`.
    structure: Vec<Vec<Expr>>,
    opposite: bool,
}

impl LieAlgebroidModel {
    /// A model from anchor columns and the structure functions for `i < j`.
    pub fn from_frame(
        label: impl Into<String>,
        base: Chart,
        anchor: Vec<VectorField>,
        mut structure: impl FnMut(usize, usize) -> Vec<Expr>,
    ) -> Result<Self> {
        let rank = anchor.len();
        for v in &anchor {
            base.ensure_same(v.chart())?;
        }
        let mut table = Vec::new();
        for i in 0..rank {
            for j in i + 1..rank {
                let c = structure(i, j);
                if c.len() != rank {
                    return Err(Error::RankMismatch(format!(
                        "structure functions of ⟦e{},e{}⟧ have {} entries, rank is {rank}",
                        i + 1,
                        j + 1,
                        c.len()
                    )));
                }
                if let Some(e) = c.iter().find(|e| e.var_bound() > base.dim()) {
                    return Err(Error::shape(format!("structure function `{e}` exceeds the base chart")));
                }
                table.push(c);
            }
        }
        Ok(LieAlgebroidModel {
            label: label.into(),
            base,
            rank,
            anchor,
            structure: table,
            opposite: false,
        })
    }

    /// `TM` with frame `∂_i`, identity anchor and zero structure functions.
    pub fn tangent(label: impl Into<String>, base: Chart) -> Self {
        let n = base.dim();
        let anchor = (0..n).map(|i| VectorField::coordinate(base.clone(), i)).collect();
        LieAlgebroidModel::from_frame(label, base, anchor, |_, _| vec![Expr::zero(); n])
            .expect("tangent frame is well formed")
    }

    /// The rank-0 algebroid over `base`.
    pub fn zero(label: impl Into<String>, base: Chart) -> Self {
        LieAlgebroidModel::from_frame(label, base, Vec::new(), |_, _| Vec::new()).expect("empty frame is well formed")
    }

    /// `T*P` of a Poisson bivector, frame `dx_i`, anchor `Π♯`.
    ///
    /// Fails with `PoissonConditionFailed` unless the induced model passes
    /// the axiom check.
    pub fn cotangent(label: impl Into<String>, pi: &Bivector, opts: &CheckOptions) -> Result<Self> {
        let base = pi.chart().clone();
        let n = base.dim();
        let dx: Vec<OneForm> = (0..n).map(|i| OneForm::coordinate(base.clone(), i)).collect();
        let anchor = dx.iter().map(|a| pi.sharp(a)).collect::<Result<Vec<_>>>()?;
        let mut failure = None;
        let model = LieAlgebroidModel::from_frame(label, base.clone(), anchor.clone(), |i, j| {
            let bracket = lie_derivative_one_form(&anchor[i], &dx[j])
                .and_then(|a| a.sub(&lie_derivative_one_form(&anchor[j], &dx[i])?))
                .and_then(|a| a.add(&d_function(&base, &pi.get(i, j))));
            match bracket {
                Ok(b) => b.comps().to_vec(),
                Err(e) => {
                    failure.get_or_insert(e);
                    vec![Expr::zero(); n]
                }
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        let report = check_algebroid_axioms(&model, opts);
        if !report.passed() {
            return Err(Error::PoissonConditionFailed {
                residual: report.residual,
            });
        }
        Ok(model)
    }

    /// `𝔤 ⋉ M` for structure constants `C^k_ij` (`i < j`) and fields `ϱ(V_i)`.
    ///
    /// Fails with `ActionNotHomomorphism` unless `ϱ` respects the brackets.
    pub fn transformation(
        label: impl Into<String>,
        base: Chart,
        constants: &[Vec<f64>],
        action: Vec<VectorField>,
        opts: &CheckOptions,
    ) -> Result<Self> {
        let r = action.len();
        if constants.len() != r * r.saturating_sub(1) / 2 {
            return Err(Error::RankMismatch(format!(
                "{} bracket rows for a {r}-dimensional Lie algebra",
                constants.len()
            )));
        }
        let model = LieAlgebroidModel::from_frame(label, base, action, |i, j| {
            constants[upper_index(r, i, j)].iter().map(|&c| Expr::real(c)).collect()
        })?;
        let report = check_algebroid_axioms(&model, opts);
        if !report.passed() {
            return Err(Error::ActionNotHomomorphism {
                residual: report.residual,
            });
        }
        Ok(model)
    }

    /// `A⁻`: same anchor, negated structure functions.
    pub fn opposite(&self, label: impl Into<String>) -> Self {
        LieAlgebroidModel {
            label: label.into(),
            base: self.base.clone(),
            rank: self.rank,
            anchor: self.anchor.clone(),
            structure: self
                .structure
                .iter()
                .map(|c| c.iter().map(Expr::neg).collect())
                .collect(),
            opposite: !self.opposite,
        }
    }

    /// The same bundle in the frame `e′_a = Σ_i g_ia e_i`; `g` must be
    /// invertible at the chart centre, where elimination pivots are chosen.
    pub fn change_frame(&self, label: impl Into<String>, g: &[Vec<Expr>]) -> Result<Self> {
        let r = self.rank;
        if g.len() != r || g.iter().any(|row| row.len() != r) {
            return Err(Error::shape(format!("frame change must be {r}×{r}")));
        }
        let column = |a: usize| self.section(g.iter().map(|row| row[a].clone()).collect());
        let anchor = (0..r)
            .map(|a| self.anchor_of(&column(a)?))
            .collect::<Result<Vec<_>>>()?;
        let mut pairs = Vec::new();
        let mut rhs = vec![Vec::new(); r];
        for a in 0..r {
            for b in a + 1..r {
                let br = self.bracket(&column(a)?, &column(b)?)?;
                for (row, c) in rhs.iter_mut().zip(br.coeffs) {
                    row.push(c);
                }
                pairs.push((a, b));
            }
        }
        let solved = if pairs.is_empty() {
            Vec::new()
        } else {
            solve_at(g, &rhs, &self.base.center())?.x
        };
        let mut model = LieAlgebroidModel::from_frame(label, self.base.clone(), anchor, |a, b| {
            let col = pairs.iter().position(|&p| p == (a, b)).expect("pair enumerated above");
            solved.iter().map(|row| row[col].clone()).collect()
        })?;
        model.opposite = self.opposite;
        Ok(model)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn base(&self) -> &Chart {
        &self.base
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_opposite(&self) -> bool {
        self.opposite
    }

    /// `ρ(e_i)`.
    pub fn anchor(&self, i: usize) -> &VectorField {
        &self.anchor[i]
    }

    pub fn anchors(&self) -> &[VectorField] {
        &self.anchor
    }

    /// `ρ` at `p` as a `dim × rank` matrix.
    pub fn anchor_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.base.dim(), self.rank);
        for (i, v) in self.anchor.iter().enumerate() {
            m.set_column(i, &v.eval(p)?);
        }
        Ok(m)
    }

    /// Coefficients of `⟦e_i, e_j⟧` for any pair.
    pub fn structure(&self, i: usize, j: usize) -> Vec<Expr> {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.structure[upper_index(self.rank, i, j)].clone(),
            std::cmp::Ordering::Greater => self.structure[upper_index(self.rank, j, i)]
                .iter()
                .map(Expr::neg)
                .collect(),
            std::cmp::Ordering::Equal => vec![Expr::zero(); self.rank],
        }
    }

    /// The frame section `e_i`.
    pub fn frame(&self, i: usize) -> AlgebroidSection {
        let mut coeffs = vec![Expr::zero(); self.rank];
        coeffs[i] = Expr::one();
        AlgebroidSection {
            algebroid: self.label.clone(),
            coeffs,
        }
    }

    pub fn section(&self, coeffs: Vec<Expr>) -> Result<AlgebroidSection> {
        if coeffs.len() != self.rank {
            return Err(Error::RankMismatch(format!(
                "{} coefficients for rank {}",
                coeffs.len(),
                self.rank
            )));
        }
        Ok(AlgebroidSection {
            algebroid: self.label.clone(),
            coeffs,
        })
    }

    fn ensure_owns(&self, s: &AlgebroidSection) -> Result<()> {
        if s.algebroid != self.label || s.coeffs.len() != self.rank {
            return Err(Error::AlgebroidMismatch {
                expected: self.label.clone(),
                found: s.algebroid.clone(),
            });
        }
        Ok(())
    }

    /// `ρ(Σ f_i e_i) = Σ f_i ρ(e_i)`.
    pub fn anchor_of(&self, s: &AlgebroidSection) -> Result<VectorField> {
        self.ensure_owns(s)?;
        let mut out = VectorField::zero(self.base.clone());
        for (f, v) in s.coeffs.iter().zip(&self.anchor) {
            if !f.is_zero() {
                out = out.add(&v.scale(f))?;
            }
        }
        Ok(out)
    }

    /// `⟦Σ f_i e_i, Σ g_j e_j⟧ = Σ f_i g_j c_ij + Σ_j (ρ(a) g_j) e_j − Σ_i (ρ(b) f_i) e_i`,
    /// negated as a whole for an opposite model.
    pub fn bracket(&self, a: &AlgebroidSection, b: &AlgebroidSection) -> Result<AlgebroidSection> {
        self.ensure_owns(a)?;
        self.ensure_owns(b)?;
        let r = self.rank;
        let mut out: Vec<Vec<Expr>> = vec![Vec::new(); r];
        for i in 0..r {
            if a.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..r {
                if i == j || b.coeffs[j].is_zero() {
                    continue;
                }
                let fg = a.coeffs[i].mul(&b.coeffs[j]);
                for (k, c) in self.structure(i, j).iter().enumerate() {
                    if !c.is_zero() {
                        out[k].push(fg.mul(c));
                    }
                }
            }
        }
        let ra = self.anchor_of(a)?;
        let rb = self.anchor_of(b)?;
        // The opposite bracket negates the Leibniz terms along with `c`.
        let (ra, rb) = if self.opposite { (ra.neg(), rb.neg()) } else { (ra, rb) };
        for k in 0..r {
            out[k].push(ra.apply(&b.coeffs[k]));
            out[k].push(rb.apply(&a.coeffs[k]).neg());
        }
        Ok(AlgebroidSection {
            algebroid: self.label.clone(),
            coeffs: out.iter().map(|parts| Expr::sum(parts.iter())).collect(),
        })
    }
}

/// A section `Σ f_i e_i` of a named algebroid.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebroidSection {
    algebroid: String,
    coeffs: Vec<Expr>,
}

impl AlgebroidSection {
    pub fn algebroid(&self) -> &str {
        &self.algebroid
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn scale(&self, f: &Expr) -> AlgebroidSection {
        AlgebroidSection {
            algebroid: self.algebroid.clone(),
            coeffs: self.coeffs.iter().map(|c| c.mul(f)).collect(),
        }
    }

    pub fn add(&self, other: &AlgebroidSection) -> Result<AlgebroidSection> {
        if self.algebroid != other.algebroid {
            return Err(Error::AlgebroidMismatch {
                expected: self.algebroid.clone(),
                found: other.algebroid.clone(),
            });
        }
        Ok(AlgebroidSection {
            algebroid: self.algebroid.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Expr::is_zero)
    }
}

/// Anchor-homomorphism and frame-Jacobi residuals over seeded samples.
///
/// An opposite model keeps the anchor, which is then an anti-homomorphism.
pub fn check_algebroid_axioms(a: &LieAlgebroidModel, opts: &CheckOptions) -> CheckReport {
    let mut rep = ReportBuilder::new("algebroid_axioms", opts.tol);
    let points = a.base.samples(opts.samples, opts.seed);
    let r = a.rank;
    rep.declare("anchor_homomorphism");
    rep.declare("jacobi");
    let record = |rep: &mut ReportBuilder, name: &str, exprs: Result<Vec<Expr>>| match exprs {
        Ok(e) => rep.observe_exprs(name, &e, &points),
        Err(e) => rep.status(name, Status::Error, 0.0, Some(e.to_string())),
    };
    for i in 0..r {
        for j in i + 1..r {
            let res = (|| {
                let image = a.anchor_of(&a.section(a.structure(i, j))?)?;
                let mut bracket = lie_bracket_vf(&a.anchor[i], &a.anchor[j])?;
                if a.opposite {
                    bracket = bracket.neg();
                }
                Ok(image.sub(&bracket)?.into_comps())
            })();
            record(&mut rep, "anchor_homomorphism", res);
        }
    }
    for i in 0..r {
        for j in i + 1..r {
            for k in j + 1..r {
                let res = (|| {
                    let (ei, ej, ek) = (a.frame(i), a.frame(j), a.frame(k));
                    let t1 = a.bracket(&a.bracket(&ei, &ej)?, &ek)?;
                    let t2 = a.bracket(&a.bracket(&ej, &ek)?, &ei)?;
                    let t3 = a.bracket(&a.bracket(&ek, &ei)?, &ej)?;
                    Ok(t1.add(&t2)?.add(&t3)?.coeffs)
                })();
                record(&mut rep, "jacobi", res);
            }
        }
    }
    rep.finish()
}

/// A bundle map `Φ(e_i) = Σ_a Φ_ai (f_a ∘ Φ̲)` between trivialized algebroids.
#[derive(Debug, Clone)]
pub struct MorphismData {
    source: Arc<LieAlgebroidModel>,
    target: Arc<LieAlgebroidModel>,
    base_map: SmoothMap,
    /// `matrix[a][i] = Φ_ai`, functions on the source base.
    matrix: Vec<Vec<Expr>>,
}

impl MorphismData {
    pub fn new(
        source: Arc<LieAlgebroidModel>,
        target: Arc<LieAlgebroidModel>,
        base_map: SmoothMap,
        matrix: Vec<Vec<Expr>>,
    ) -> Result<Self> {
        source.base.ensure_same(base_map.source())?;
        target.base.ensure_same(base_map.target())?;
        if matrix.len() != target.rank || matrix.iter().any(|row| row.len() != source.rank) {
            return Err(Error::RankMismatch(format!(
                "morphism matrix must be {} x {}",
                target.rank, source.rank
            )));
        }
        Ok(MorphismData {
            source,
            target,
            base_map,
            matrix,
        })
    }

    pub fn identity(a: Arc<LieAlgebroidModel>) -> Self {
        let r = a.rank;
        let matrix = (0..r)
            .map(|x| {
                (0..r)
                    .map(|y| if x == y { Expr::one() } else { Expr::zero() })
                    .collect()
            })
            .collect();
        MorphismData {
            base_map: SmoothMap::identity(a.base.clone()),
            source: a.clone(),
            target: a,
            matrix,
        }
    }

    /// The anchor `ρ: A → TM` as a morphism into the tangent algebroid.
    pub fn anchor_map(a: Arc<LieAlgebroidModel>, tangent: Arc<LieAlgebroidModel>) -> Result<Self> {
        let n = a.base.dim();
        let matrix = (0..n)
            .map(|k| (0..a.rank).map(|i| a.anchor[i].comps()[k].clone()).collect())
            .collect();
        MorphismData::new(a.clone(), tangent, SmoothMap::identity(a.base.clone()), matrix)
    }

    /// The differential `df: TM′ → TM` between tangent algebroids.
    pub fn differential(source: Arc<LieAlgebroidModel>, target: Arc<LieAlgebroidModel>, f: SmoothMap) -> Result<Self> {
        let matrix = f.jacobian();
        MorphismData::new(source, target, f, matrix)
    }

    pub fn scaled(&self, factor: &Expr) -> Self {
        let mut out = self.clone();
        for row in out.matrix.iter_mut() {
            for e in row.iter_mut() {
                *e = e.mul(factor);
            }
        }
        out
    }

    pub fn source(&self) -> &Arc<LieAlgebroidModel> {
        &self.source
    }

    pub fn target(&self) -> &Arc<LieAlgebroidModel> {
        &self.target
    }

    pub fn base_map(&self) -> &SmoothMap {
        &self.base_map
    }

    pub fn matrix(&self) -> &[Vec<Expr>] {
        &self.matrix
    }

    pub fn matrix_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.target.rank, self.source.rank);
        for (a, row) in self.matrix.iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                m[(a, i)] = e.eval(p)?;
            }
        }
        Ok(m)
    }

    /// Column `i`: the target-frame coefficients of `Φ(e_i)`.
    fn column(&self, i: usize) -> Vec<Expr> {
        self.matrix.iter().map(|row| row[i].clone()).collect()
    }

    fn anchor_residual(&self, i: usize) -> Result<Vec<Expr>> {
        let n = self.target.base.dim();
        let jac = self.base_map.jacobian();
        let rho1 = &self.source.anchor[i];
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut parts = Vec::new();
            for (a, row) in self.matrix.iter().enumerate() {
                if !row[i].is_zero() {
                    let rho2 = self.base_map.pull(&self.target.anchor[a].comps()[k])?;
                    parts.push(row[i].mul(&rho2));
                }
            }
            for (l, v) in rho1.comps().iter().enumerate() {
                parts.push(jac[k][l].mul(v).neg());
            }
            out.push(Expr::sum(parts.iter()));
        }
        Ok(out)
    }

    fn bracket_residual(&self, i: usize, j: usize) -> Result<Vec<Expr>> {
        let rt = self.target.rank;
        let c1 = self.source.structure(i, j);
        let mut parts: Vec<Vec<Expr>> = vec![Vec::new(); rt];
        for (k, c) in c1.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (a, phi) in self.column(k).iter().enumerate() {
                parts[a].push(c.mul(phi));
            }
        }
        let (ci, cj) = (self.column(i), self.column(j));
        for a in 0..rt {
            for b in 0..rt {
                if a == b || ci[a].is_zero() || cj[b].is_zero() {
                    continue;
                }
                let w = ci[a].mul(&cj[b]);
                for (k, c2) in self.target.structure(a, b).iter().enumerate() {
                    if !c2.is_zero() {
                        parts[k].push(w.mul(&self.base_map.pull(c2)?).neg());
                    }
                }
            }
        }
        let (rho_i, rho_j) = (&self.source.anchor[i], &self.source.anchor[j]);
        for b in 0..rt {
            parts[b].push(rho_i.apply(&cj[b]).neg());
            parts[b].push(rho_j.apply(&ci[b]));
        }
        Ok(parts.iter().map(|p| Expr::sum(p.iter())).collect())
    }
}

/// Anchor and bracket compatibility of a morphism in the fixed decomposition
/// `γ_a = f_a`, `ξ_ia = Φ_ai`.
pub fn check_morphism(m: &MorphismData, opts: &CheckOptions) -> CheckReport {
    let mut rep = ReportBuilder::new("morphism", opts.tol);
    let points = m.source.base.samples(opts.samples, opts.seed);
    rep.declare("anchor_compatibility");
    rep.declare("bracket_compatibility");
    for i in 0..m.source.rank {
        match m.anchor_residual(i) {
            Ok(e) => rep.observe_exprs("anchor_compatibility", &e, &points),
            Err(e) => rep.status("anchor_compatibility", Status::Error, 0.0, Some(e.to_string())),
        }
        for j in i + 1..m.source.rank {
            match m.bracket_residual(i, j) {
                Ok(e) => rep.observe_exprs("bracket_compatibility", &e, &points),
                Err(e) => rep.status("bracket_compatibility", Status::Error, 0.0, Some(e.to_string())),
            }
        }
    }
    let anchor_ok = rep.detail_status("anchor_compatibility") == Some(Status::Pass);
    let bracket_ok = rep.detail_status("bracket_compatibility") == Some(Status::Pass);
    rep.flag(
        "graph_condition_1",
        anchor_ok,
        Some("derived from anchor compatibility".into()),
    );
    rep.flag(
        "graph_condition_2",
        anchor_ok && bracket_ok,
        Some("derived from bracket compatibility".into()),
    );
    rep.finish()
}

/// Basis (as columns `(V, α)`) of `{(df)_x V = ρ(α)_{f(x)}}` at `x`, after
/// checking `Im ρ + Im df = T_{f(x)}M`.
pub fn pullback_fiber(a: &LieAlgebroidModel, f: &SmoothMap, x: &[f64]) -> Result<DMatrix<f64>> {
    a.base.ensure_same(f.target())?;
    f.source().ensure_contains(x)?;
    let y = f.eval(x)?;
    let rho = a.anchor_at(&y)?;
    let df = f.jacobian_at(x)?;
    let n = a.base.dim();
    let span = linalg::rank(&linalg::hstack(&rho, &df));
    if span != n {
        return Err(Error::TransversalityFailed {
            point: x.to_vec(),
            rank: span,
            needed: n,
        });
    }
    Ok(linalg::null_space(&linalg::hstack(&df, &(-rho))))
}

/// Basis (as columns `(a, b)`) of `{Φ1(a) = Φ2(b)}` over `(p, q)`.
pub fn fibered_product_fiber(
    m1: &MorphismData,
    m2: &MorphismData,
    p: &[f64],
    q: &[f64],
    tol: f64,
) -> Result<DMatrix<f64>> {
    if m1.target.label != m2.target.label {
        return Err(Error::AlgebroidMismatch {
            expected: m1.target.label.clone(),
            found: m2.target.label.clone(),
        });
    }
    m1.source.base.ensure_contains(p)?;
    m2.source.base.ensure_contains(q)?;
    let r1 = m1.base_map.eval(p)?;
    let r2 = m2.base_map.eval(q)?;
    let gap = r1.iter().zip(&r2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if gap > tol {
        return Err(Error::BasePointMismatch(format!("{r1:?} and {r2:?} differ by {gap:e}")));
    }
    let phi1 = m1.matrix_at(p)?;
    let phi2 = m2.matrix_at(q)?;
    let rt = m1.target.rank;
    let surj = linalg::rank(&linalg::hstack(&phi1, &phi2));
    if surj != rt {
        return Err(Error::SurjectivityFailed { rank: surj, needed: rt });
    }
    let n = m1.target.base.dim();
    let d1 = m1.base_map.jacobian_at(p)?;
    let d2 = m2.base_map.jacobian_at(q)?;
    let trans = linalg::rank(&linalg::hstack(&d1, &d2));
    if trans != n {
        return Err(Error::TransversalityFailed {
            point: p.iter().chain(q).cloned().collect(),
            rank: trans,
            needed: n,
        });
    }
    Ok(linalg::null_space(&linalg::hstack(&phi1, &(-phi2))))
}
