//! Scenario files: loading, label resolution and model construction.
//!
//! Loading parses every expression and resolves every label, so malformed
//! files fail before any check runs. Models are built per check from the
//! immutable declarations; construction failures surface as error reports.

mod run;
pub mod schema;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

pub use run::{run_checks, run_scenario, RunOptions, ScenarioReport};
use schema::*;

use crate::action::{unique_lift_action, ActionModel, MoritaWitness, QuotientChartModel};
use crate::algebroid::{LieAlgebroidModel, MorphismData};
use crate::apath::APath;
use crate::calculus::{
    parse_with_aliases, Bivector, Chart, ChartDomain, Expr, OneForm, SmoothMap, TwoForm, VectorField,
};
use crate::dirac::{gauge_transform, induced_dirac_action, DiracMapData, DiracStructureModel, GeneralizedSection};
use crate::error::{Error, Result};
use crate::report::CheckOptions;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_ODE_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_SAMPLES: usize = 64;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Manifold,
    Field,
    Map,
    Algebroid,
    Morphism,
    Dirac,
    DiracMap,
    Action,
    Quotient,
    Witness,
    Path,
}

impl Section {
    fn name(self) -> &'static str {
        match self {
            Section::Manifold => "manifold",
            Section::Field => "field",
            Section::Map => "map",
            Section::Algebroid => "algebroid",
            Section::Morphism => "morphism",
            Section::Dirac => "dirac structure",
            Section::DiracMap => "dirac map",
            Section::Action => "action",
            Section::Quotient => "quotient",
            Section::Witness => "witness",
            Section::Path => "path",
        }
    }
}

type Node = (Section, String);

/// A loaded scenario with its charts built and every label verified.
#[derive(Debug, Clone)]
pub struct Scenario {
    file: ScenarioFile,
    charts: BTreeMap<String, Chart>,
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, section: Section, label: &str, context: &str) -> Result<&'a T> {
    map.get(label).ok_or_else(|| Error::UnresolvedLabel {
        label: label.to_string(),
        context: format!("{} referenced by {context}", section.name()),
    })
}

fn json_error(src: &str, e: serde_json::Error) -> Error {
    use serde_json::error::Category;
    match e.classify() {
        Category::Data => Error::SchemaViolation(e.to_string()),
        Category::Io => Error::Io(e.to_string()),
        Category::Syntax | Category::Eof => {
            let offset: usize = src
                .split_inclusive('\n')
                .take(e.line().saturating_sub(1))
                .map(str::len)
                .sum();
            Error::Parse {
                position: offset + e.column().saturating_sub(1),
                message: e.to_string(),
            }
        }
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Scenario::from_json(&src)
}

impl Scenario {
    pub fn from_json(src: &str) -> Result<Scenario> {
        let file: ScenarioFile = serde_json::from_str(src).map_err(|e| json_error(src, e))?;
        Scenario::new(file)
    }

    pub fn new(file: ScenarioFile) -> Result<Scenario> {
        let mut charts = BTreeMap::new();
        for (label, m) in &file.manifolds {
            let chart = ChartDomain::new(label.clone(), m.bounds.iter().map(|b| (b[0], b[1])).collect())?;
            if !m.coords.is_empty() && m.coords.len() != chart.dim() {
                return Err(Error::SchemaViolation(format!(
                    "manifold {label}: {} coordinate names for dimension {}",
                    m.coords.len(),
                    chart.dim()
                )));
            }
            charts.insert(label.clone(), chart);
        }
        let s = Scenario { file, charts };
        s.validate()?;
        Ok(s)
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn checks(&self) -> &[CheckSpec] {
        &self.file.checks
    }

    pub fn defaults(&self) -> &Defaults {
        &self.file.defaults
    }

    /// Options for a check: explicit values, then overrides, then scenario
    /// defaults, then the kind's default.
    pub fn options_for(&self, c: &CheckSpec, overrides: &Defaults) -> CheckOptions {
        let d = &self.file.defaults;
        let kind_tol = if c.kind.ode_backed() {
            DEFAULT_ODE_TOLERANCE
        } else {
            DEFAULT_TOLERANCE
        };
        CheckOptions {
            tol: c.tolerance.or(overrides.tolerance).or(d.tolerance).unwrap_or(kind_tol),
            samples: c.samples.or(overrides.samples).or(d.samples).unwrap_or(DEFAULT_SAMPLES),
            seed: c.seed.or(overrides.seed).or(d.seed).unwrap_or(DEFAULT_SEED),
        }
    }

    // ---- validation -------------------------------------------------------

    fn exists(&self, section: Section, label: &str) -> bool {
        let f = &self.file;
        match section {
            Section::Manifold => f.manifolds.contains_key(label),
            Section::Field => f.fields.contains_key(label),
            Section::Map => f.maps.contains_key(label),
            Section::Algebroid => f.algebroids.contains_key(label),
            Section::Morphism => f.morphisms.contains_key(label),
            Section::Dirac => f.dirac.contains_key(label),
            Section::DiracMap => f.dirac_maps.contains_key(label),
            Section::Action => f.actions.contains_key(label),
            Section::Quotient => f.quotients.contains_key(label),
            Section::Witness => f.witnesses.contains_key(label),
            Section::Path => f.paths.contains_key(label),
        }
    }

    fn refs(&self, (section, label): &Node) -> Vec<Node> {
        use Section as S;
        let f = &self.file;
        let n = |s: Section, l: &String| (s, l.clone());
        match section {
            S::Manifold => vec![],
            S::Field => vec![n(S::Manifold, &f.fields[label].chart)],
            S::Map => {
                let m = &f.maps[label];
                vec![n(S::Manifold, &m.source), n(S::Manifold, &m.target)]
            }
            S::Algebroid => match &f.algebroids[label] {
                AlgebroidSpec::Tangent { chart } | AlgebroidSpec::Zero { chart } => vec![n(S::Manifold, chart)],
                AlgebroidSpec::Cotangent { bivector } => vec![n(S::Field, bivector)],
                AlgebroidSpec::Transformation { chart, fields, .. } => {
                    let mut v = vec![n(S::Manifold, chart)];
                    v.extend(fields.iter().map(|l| n(S::Field, l)));
                    v
                }
                AlgebroidSpec::Dirac { dirac } => vec![n(S::Dirac, dirac)],
                AlgebroidSpec::Opposite { of } => vec![n(S::Algebroid, of)],
                AlgebroidSpec::Frame { chart, anchor, .. } => {
                    let mut v = vec![n(S::Manifold, chart)];
                    v.extend(anchor.iter().map(|l| n(S::Field, l)));
                    v
                }
            },
            S::Morphism => match &f.morphisms[label] {
                MorphismSpec::Identity { algebroid } => vec![n(S::Algebroid, algebroid)],
                MorphismSpec::Anchor { algebroid, tangent } => {
                    vec![n(S::Algebroid, algebroid), n(S::Algebroid, tangent)]
                }
                MorphismSpec::Differential { source, target, map } => {
                    vec![n(S::Algebroid, source), n(S::Algebroid, target), n(S::Map, map)]
                }
                MorphismSpec::Scaled { of, .. } => vec![n(S::Morphism, of)],
                MorphismSpec::Matrix {
                    source,
                    target,
                    base_map,
                    ..
                } => {
                    vec![n(S::Algebroid, source), n(S::Algebroid, target), n(S::Map, base_map)]
                }
            },
            S::Dirac => match &f.dirac[label] {
                DiracSpec::GraphOfBivector { bivector } => vec![n(S::Field, bivector)],
                DiracSpec::GraphOfTwoForm { two_form } => vec![n(S::Field, two_form)],
                DiracSpec::Frame { chart, .. } => vec![n(S::Manifold, chart)],
                DiracSpec::Gauge { of, two_form } => vec![n(S::Dirac, of), n(S::Field, two_form)],
            },
            S::DiracMap => {
                let m = &f.dirac_maps[label];
                vec![n(S::Dirac, &m.source), n(S::Dirac, &m.target), n(S::Map, &m.map)]
            }
            S::Action => match &f.actions[label] {
                ActionSpec::Fields {
                    algebroid, momentum, ..
                }
                | ActionSpec::UniqueLift { algebroid, momentum } => {
                    vec![n(S::Algebroid, algebroid), n(S::Map, momentum)]
                }
                ActionSpec::InducedDirac { dirac_map } => vec![n(S::DiracMap, dirac_map)],
                ActionSpec::Witness { witness, .. } => vec![n(S::Witness, witness)],
            },
            S::Quotient => {
                let q = &f.quotients[label];
                vec![n(S::Map, &q.projection), n(S::Map, &q.section)]
            }
            S::Witness => match &f.witnesses[label] {
                WitnessSpec::Actions { left, right, .. } => vec![n(S::Action, left), n(S::Action, right)],
                WitnessSpec::DualPair {
                    bivector,
                    j1,
                    j2,
                    a1,
                    a2,
                    ..
                } => vec![
                    n(S::Field, bivector),
                    n(S::Map, j1),
                    n(S::Map, j2),
                    n(S::Algebroid, a1),
                    n(S::Algebroid, a2),
                ],
            },
            S::Path => match &f.paths[label] {
                PathSpec::Curve { algebroid, .. } => vec![n(S::Algebroid, algebroid)],
                PathSpec::Concat { parts } => parts.iter().map(|l| n(S::Path, l)).collect(),
            },
        }
    }

    fn all_nodes(&self) -> Vec<Node> {
        let f = &self.file;
        let mut out = Vec::new();
        let mut add = |s: Section, keys: Vec<&String>| out.extend(keys.into_iter().map(|k| (s, k.clone())));
        add(Section::Field, f.fields.keys().collect());
        add(Section::Map, f.maps.keys().collect());
        add(Section::Algebroid, f.algebroids.keys().collect());
        add(Section::Morphism, f.morphisms.keys().collect());
        add(Section::Dirac, f.dirac.keys().collect());
        add(Section::DiracMap, f.dirac_maps.keys().collect());
        add(Section::Action, f.actions.keys().collect());
        add(Section::Quotient, f.quotients.keys().collect());
        add(Section::Witness, f.witnesses.keys().collect());
        add(Section::Path, f.paths.keys().collect());
        out
    }

    fn validate(&self) -> Result<()> {
        let nodes = self.all_nodes();
        for node in &nodes {
            for (s, l) in self.refs(node) {
                if !self.exists(s, &l) {
                    return Err(Error::UnresolvedLabel {
                        label: l,
                        context: format!("{} referenced by {} {}", s.name(), node.0.name(), node.1),
                    });
                }
            }
        }
        // Depth-first search with an explicit path for cycle reporting.
        let mut done = BTreeSet::new();
        for node in &nodes {
            self.visit(node, &mut Vec::new(), &mut done)?;
        }
        for node in &nodes {
            self.parse_declaration(node)?;
        }
        for (i, c) in self.file.checks.iter().enumerate() {
            self.validate_check(i, c)?;
        }
        Ok(())
    }

    fn visit(&self, node: &Node, stack: &mut Vec<Node>, done: &mut BTreeSet<Node>) -> Result<()> {
        if done.contains(node) {
            return Ok(());
        }
        if let Some(pos) = stack.iter().position(|n| n == node) {
            let cycle: Vec<String> = stack[pos..]
                .iter()
                .chain(std::iter::once(node))
                .map(|(_, l)| l.clone())
                .collect();
            return Err(Error::CyclicDefinition(cycle.join(" -> ")));
        }
        stack.push(node.clone());
        for next in self.refs(node) {
            self.visit(&next, stack, done)?;
        }
        stack.pop();
        done.insert(node.clone());
        Ok(())
    }

    /// Parses every expression of a declaration without building models.
    fn parse_declaration(&self, (section, label): &Node) -> Result<()> {
        let f = &self.file;
        match section {
            Section::Field => {
                self.field(label)?;
            }
            Section::Map => {
                self.map(label)?;
            }
            Section::Algebroid => {
                if let AlgebroidSpec::Frame { chart, structure, .. } = &f.algebroids[label] {
                    for row in structure {
                        self.parse_all(chart, row, label)?;
                    }
                }
            }
            Section::Morphism => match &f.morphisms[label] {
                MorphismSpec::Scaled { of, factor } => {
                    let chart = self.morphism_source_chart(of)?;
                    self.parse_on(&chart, factor, label)?;
                }
                MorphismSpec::Matrix { source, matrix, .. } => {
                    let chart = self.algebroid_chart(source)?;
                    for row in matrix {
                        self.parse_all(&chart, row, label)?;
                    }
                }
                _ => {}
            },
            Section::Dirac => {
                if let DiracSpec::Frame { chart, sections } = &f.dirac[label] {
                    for s in sections {
                        self.parse_all(chart, &s.vector, label)?;
                        self.parse_all(chart, &s.form, label)?;
                    }
                }
            }
            Section::Action => {
                if let ActionSpec::Fields { momentum, fields, .. } = &f.actions[label] {
                    let source = &f.maps[momentum].source;
                    for comps in fields {
                        self.parse_all(source, comps, label)?;
                    }
                }
            }
            Section::Path => {
                if let PathSpec::Curve { coefficients, base, .. } = &f.paths[label] {
                    for e in coefficients.iter().chain(base) {
                        parse_with_aliases(e, 1, &["t"]).map_err(|err| contextualize(err, label))?;
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn validate_check(&self, index: usize, c: &CheckSpec) -> Result<()> {
        use CheckKind as K;
        let ctx = format!("check #{} ({})", index + 1, c.id.as_deref().unwrap_or(c.kind.as_str()));
        let need = |what: &str, v: &Option<String>, section: Section| -> Result<()> {
            let l = v.as_ref().ok_or_else(|| {
                Error::SchemaViolation(format!("{ctx}: `{what}` is required for {}", c.kind.as_str()))
            })?;
            if self.exists(section, l) {
                Ok(())
            } else {
                Err(Error::UnresolvedLabel {
                    label: l.clone(),
                    context: format!("{} referenced by {ctx}", section.name()),
                })
            }
        };
        let need_list = |what: &str, v: &[String], n: usize, section: Section| -> Result<()> {
            if v.len() != n {
                return Err(Error::SchemaViolation(format!("{ctx}: `{what}` must list {n} labels")));
            }
            v.iter().try_for_each(|l| need(what, &Some(l.clone()), section))
        };
        let need_point = |what: &str, p: &Option<Vec<f64>>| -> Result<()> {
            p.as_ref()
                .map(|_| ())
                .ok_or_else(|| Error::SchemaViolation(format!("{ctx}: `{what}` is required for {}", c.kind.as_str())))
        };
        match c.kind {
            K::AlgebroidAxioms => need("algebroid", &c.algebroid, Section::Algebroid)?,
            K::Morphism => need("morphism", &c.morphism, Section::Morphism)?,
            K::PullbackFiber => {
                need("algebroid", &c.algebroid, Section::Algebroid)?;
                need("map", &c.map, Section::Map)?;
                need_point("point", &c.point)?;
            }
            K::FiberedProduct => {
                need_list("morphisms", &c.morphisms, 2, Section::Morphism)?;
                if c.points.len() != 2 {
                    return Err(Error::SchemaViolation(format!("{ctx}: `points` must hold two points")));
                }
            }
            K::Dirac => need("dirac", &c.dirac, Section::Dirac)?,
            K::Gauge => {
                need("dirac", &c.dirac, Section::Dirac)?;
                need("two_form", &c.two_form, Section::Field)?;
            }
            K::DiracMap | K::InducedAction => need("dirac_map", &c.dirac_map, Section::DiracMap)?,
            K::Action | K::Module => need("action", &c.action, Section::Action)?,
            K::UniqueLift => {
                need("algebroid", &c.algebroid, Section::Algebroid)?;
                need("map", &c.map, Section::Map)?;
            }
            K::LeafAction => {
                need("action", &c.action, Section::Action)?;
                need("quotient", &c.quotient, Section::Quotient)?;
            }
            K::QuasiEquivalence | K::StrongMorita => need("witness", &c.witness, Section::Witness)?,
            K::TensorDistribution => {
                need_list("witnesses", &c.witnesses, 2, Section::Witness)?;
                if let Some(comp) = &c.composition {
                    need("composition.embedding", &Some(comp.embedding.clone()), Section::Map)?;
                    need("composition.quotient", &Some(comp.quotient.clone()), Section::Quotient)?;
                } else if c.points.len() != 2 {
                    return Err(Error::SchemaViolation(format!(
                        "{ctx}: `points` must hold x and y, or `composition` must be given"
                    )));
                }
            }
            K::ApathValid => need("path", &c.path, Section::Path)?,
            K::ApathIntegrate => {
                need("path", &c.path, Section::Path)?;
                need("action", &c.action, Section::Action)?;
                need_point("point", &c.point)?;
            }
            K::TransportInvariances => {
                need("path", &c.path, Section::Path)?;
                need("action", &c.action, Section::Action)?;
                need_point("point", &c.point)?;
                if c.witness.is_some() {
                    need("witness", &c.witness, Section::Witness)?;
                }
            }
            K::PsiTransport => {
                need("witness", &c.witness, Section::Witness)?;
                need("path", &c.path, Section::Path)?;
                need("action", &c.action, Section::Action)?;
                need_point("point", &c.point)?;
                if c.points.len() != 2 {
                    return Err(Error::SchemaViolation(format!("{ctx}: `points` must hold x′ and x")));
                }
                if c.module_morphism.is_some() {
                    need("module_morphism", &c.module_morphism, Section::Map)?;
                }
            }
        }
        Ok(())
    }

    // ---- expressions ------------------------------------------------------

    pub fn chart(&self, label: &str) -> Result<Chart> {
        self.charts.get(label).cloned().ok_or_else(|| Error::UnresolvedLabel {
            label: label.to_string(),
            context: "manifold".into(),
        })
    }

    fn parse_on(&self, chart: &str, src: &str, context: &str) -> Result<Expr> {
        let m = lookup(&self.file.manifolds, Section::Manifold, chart, context)?;
        let aliases: Vec<&str> = m.coords.iter().map(String::as_str).collect();
        parse_with_aliases(src, m.bounds.len(), &aliases).map_err(|e| contextualize(e, context))
    }

    fn parse_all(&self, chart: &str, srcs: &[String], context: &str) -> Result<Vec<Expr>> {
        srcs.iter().map(|s| self.parse_on(chart, s, context)).collect()
    }

    fn field(&self, label: &str) -> Result<(Chart, FieldKind, Vec<Expr>)> {
        let spec = lookup(&self.file.fields, Section::Field, label, "scenario")?;
        let chart = self.chart(&spec.chart)?;
        let n = chart.dim();
        let expected = match spec.kind {
            FieldKind::Scalar => 1,
            FieldKind::Vector | FieldKind::OneForm => n,
            FieldKind::TwoForm | FieldKind::Bivector => n * n.saturating_sub(1) / 2,
        };
        if spec.components.len() != expected {
            return Err(Error::SchemaViolation(format!(
                "field {label}: {} components, expected {expected}",
                spec.components.len()
            )));
        }
        let comps = self.parse_all(&spec.chart, &spec.components, label)?;
        Ok((chart, spec.kind, comps))
    }

    fn field_of(&self, label: &str, kind: FieldKind) -> Result<(Chart, Vec<Expr>)> {
        let (chart, k, comps) = self.field(label)?;
        if k != kind {
            return Err(Error::SchemaViolation(format!(
                "field {label} is {k:?}, expected {kind:?}"
            )));
        }
        Ok((chart, comps))
    }

    pub fn vector_field(&self, label: &str) -> Result<VectorField> {
        let (c, e) = self.field_of(label, FieldKind::Vector)?;
        VectorField::new(c, e)
    }

    pub fn one_form(&self, label: &str) -> Result<OneForm> {
        let (c, e) = self.field_of(label, FieldKind::OneForm)?;
        OneForm::new(c, e)
    }

    pub fn two_form(&self, label: &str) -> Result<TwoForm> {
        let (c, e) = self.field_of(label, FieldKind::TwoForm)?;
        TwoForm::new(c, e)
    }

    pub fn bivector(&self, label: &str) -> Result<Bivector> {
        let (c, e) = self.field_of(label, FieldKind::Bivector)?;
        Bivector::new(c, e)
    }

    pub fn map(&self, label: &str) -> Result<SmoothMap> {
        let spec = lookup(&self.file.maps, Section::Map, label, "scenario")?;
        let comps = self.parse_all(&spec.source, &spec.components, label)?;
        SmoothMap::new(self.chart(&spec.source)?, self.chart(&spec.target)?, comps)
    }

    // ---- models -----------------------------------------------------------

    fn algebroid_chart(&self, label: &str) -> Result<String> {
        let f = &self.file;
        Ok(match lookup(&f.algebroids, Section::Algebroid, label, "scenario")? {
            AlgebroidSpec::Tangent { chart }
            | AlgebroidSpec::Zero { chart }
            | AlgebroidSpec::Transformation { chart, .. }
            | AlgebroidSpec::Frame { chart, .. } => chart.clone(),
            AlgebroidSpec::Cotangent { bivector } => f.fields[bivector].chart.clone(),
            AlgebroidSpec::Dirac { dirac } => self.dirac_chart(dirac)?,
            AlgebroidSpec::Opposite { of } => self.algebroid_chart(of)?,
        })
    }

    fn dirac_chart(&self, label: &str) -> Result<String> {
        let f = &self.file;
        Ok(match lookup(&f.dirac, Section::Dirac, label, "scenario")? {
            DiracSpec::GraphOfBivector { bivector: l } | DiracSpec::GraphOfTwoForm { two_form: l } => {
                f.fields[l].chart.clone()
            }
            DiracSpec::Frame { chart, .. } => chart.clone(),
            DiracSpec::Gauge { of, .. } => self.dirac_chart(of)?,
        })
    }

    fn morphism_source_chart(&self, label: &str) -> Result<String> {
        let f = &self.file;
        match lookup(&f.morphisms, Section::Morphism, label, "scenario")? {
            MorphismSpec::Identity { algebroid } | MorphismSpec::Anchor { algebroid, .. } => {
                self.algebroid_chart(algebroid)
            }
            MorphismSpec::Differential { source, .. } | MorphismSpec::Matrix { source, .. } => {
                self.algebroid_chart(source)
            }
            MorphismSpec::Scaled { of, .. } => self.morphism_source_chart(of),
        }
    }

    pub fn algebroid(&self, label: &str) -> Result<Arc<LieAlgebroidModel>> {
        let opts = CheckOptions::default();
        let spec = lookup(&self.file.algebroids, Section::Algebroid, label, "scenario")?;
        let model = match spec {
            AlgebroidSpec::Tangent { chart } => LieAlgebroidModel::tangent(label, self.chart(chart)?),
            AlgebroidSpec::Zero { chart } => LieAlgebroidModel::zero(label, self.chart(chart)?),
            AlgebroidSpec::Cotangent { bivector } => {
                LieAlgebroidModel::cotangent(label, &self.bivector(bivector)?, &opts)?
            }
            AlgebroidSpec::Transformation {
                chart,
                constants,
                fields,
            } => {
                let fields = fields
                    .iter()
                    .map(|l| self.vector_field(l))
                    .collect::<Result<Vec<_>>>()?;
                LieAlgebroidModel::transformation(label, self.chart(chart)?, constants, fields, &opts)?
            }
            AlgebroidSpec::Dirac { dirac } => self.dirac(dirac)?.to_algebroid()?.relabel(label),
            AlgebroidSpec::Opposite { of } => self.algebroid(of)?.opposite(label),
            AlgebroidSpec::Frame {
                chart,
                anchor,
                structure,
            } => {
                let anchor = anchor
                    .iter()
                    .map(|l| self.vector_field(l))
                    .collect::<Result<Vec<_>>>()?;
                let r = anchor.len();
                if structure.len() != r * r.saturating_sub(1) / 2 {
                    return Err(Error::SchemaViolation(format!(
                        "algebroid {label}: {} structure rows for rank {r}",
                        structure.len()
                    )));
                }
                let rows = structure
                    .iter()
                    .map(|row| self.parse_all(chart, row, label))
                    .collect::<Result<Vec<_>>>()?;
                let mut k = 0;
                LieAlgebroidModel::from_frame(label, self.chart(chart)?, anchor, |_, _| {
                    k += 1;
                    rows[k - 1].clone()
                })?
            }
        };
        Ok(Arc::new(model))
    }

    pub fn morphism(&self, label: &str) -> Result<MorphismData> {
        match lookup(&self.file.morphisms, Section::Morphism, label, "scenario")? {
            MorphismSpec::Identity { algebroid } => Ok(MorphismData::identity(self.algebroid(algebroid)?)),
            MorphismSpec::Anchor { algebroid, tangent } => {
                MorphismData::anchor_map(self.algebroid(algebroid)?, self.algebroid(tangent)?)
            }
            MorphismSpec::Differential { source, target, map } => {
                MorphismData::differential(self.algebroid(source)?, self.algebroid(target)?, self.map(map)?)
            }
            MorphismSpec::Scaled { of, factor } => {
                let chart = self.morphism_source_chart(of)?;
                Ok(self.morphism(of)?.scaled(&self.parse_on(&chart, factor, label)?))
            }
            MorphismSpec::Matrix {
                source,
                target,
                base_map,
                matrix,
            } => {
                let chart = self.algebroid_chart(source)?;
                let m = matrix
                    .iter()
                    .map(|row| self.parse_all(&chart, row, label))
                    .collect::<Result<Vec<_>>>()?;
                MorphismData::new(self.algebroid(source)?, self.algebroid(target)?, self.map(base_map)?, m)
            }
        }
    }

    /// The declared structure, certified against the scenario defaults.
    pub fn dirac(&self, label: &str) -> Result<DiracStructureModel> {
        let raw = self.dirac_uncertified(label)?;
        let opts = CheckOptions {
            tol: self.file.defaults.tolerance.unwrap_or(DEFAULT_TOLERANCE),
            samples: self.file.defaults.samples.unwrap_or(DEFAULT_SAMPLES),
            seed: self.file.defaults.seed.unwrap_or(DEFAULT_SEED),
        };
        Ok(raw.certify(&opts).0)
    }

    fn dirac_uncertified(&self, label: &str) -> Result<DiracStructureModel> {
        match lookup(&self.file.dirac, Section::Dirac, label, "scenario")? {
            DiracSpec::GraphOfBivector { bivector } => {
                DiracStructureModel::graph_of_bivector(label, &self.bivector(bivector)?)
            }
            DiracSpec::GraphOfTwoForm { two_form } => {
                DiracStructureModel::graph_of_two_form(label, &self.two_form(two_form)?)
            }
            DiracSpec::Frame { chart, sections } => {
                let c = self.chart(chart)?;
                let frame = sections
                    .iter()
                    .map(|s| {
                        let v = VectorField::new(c.clone(), self.parse_all(chart, &s.vector, label)?)?;
                        let a = OneForm::new(c.clone(), self.parse_all(chart, &s.form, label)?)?;
                        GeneralizedSection::new(v, a)
                    })
                    .collect::<Result<Vec<_>>>()?;
                DiracStructureModel::new(label, c, frame)
            }
            DiracSpec::Gauge { of, two_form } => {
                let (d, _) = gauge_transform(
                    &self.dirac_uncertified(of)?,
                    &self.two_form(two_form)?,
                    &CheckOptions::default(),
                )?;
                Ok(d.with_label(label))
            }
        }
    }

    pub fn dirac_map(&self, label: &str) -> Result<DiracMapData> {
        let spec = lookup(&self.file.dirac_maps, Section::DiracMap, label, "scenario")?;
        DiracMapData::new(
            self.dirac(&spec.source)?,
            self.dirac(&spec.target)?,
            self.map(&spec.map)?,
        )
    }

    pub fn action(&self, label: &str) -> Result<ActionModel> {
        let horizon = self.file.defaults.horizon.unwrap_or(crate::action::DEFAULT_HORIZON);
        match lookup(&self.file.actions, Section::Action, label, "scenario")? {
            ActionSpec::Fields {
                algebroid,
                momentum,
                side,
                fields,
                horizon: h,
            } => {
                let mu = self.map(momentum)?;
                let src = &self.file.maps[momentum].source;
                let fields = fields
                    .iter()
                    .map(|comps| VectorField::new(mu.source().clone(), self.parse_all(src, comps, label)?))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ActionModel::new(self.algebroid(algebroid)?, mu, fields, *side)?.with_horizon(h.unwrap_or(horizon)))
            }
            ActionSpec::UniqueLift { algebroid, momentum } => {
                let opts = CheckOptions::default();
                Ok(unique_lift_action(self.algebroid(algebroid)?, &self.map(momentum)?, &opts)?.with_horizon(horizon))
            }
            ActionSpec::InducedDirac { dirac_map } => {
                Ok(induced_dirac_action(&self.dirac_map(dirac_map)?, &CheckOptions::default())?.with_horizon(horizon))
            }
            ActionSpec::Witness { witness, side } => {
                let w = self.witness(witness)?;
                let a = match side {
                    crate::action::Side::Left => w.left().clone(),
                    crate::action::Side::Right => w.right().clone(),
                };
                Ok(a.with_horizon(w.horizon()))
            }
        }
    }

    pub fn quotient(&self, label: &str) -> Result<QuotientChartModel> {
        let spec = lookup(&self.file.quotients, Section::Quotient, label, "scenario")?;
        QuotientChartModel::new(self.map(&spec.projection)?, self.map(&spec.section)?)
    }

    pub fn witness(&self, label: &str) -> Result<MoritaWitness> {
        let default = self.file.defaults.horizon.unwrap_or(crate::action::DEFAULT_HORIZON);
        match lookup(&self.file.witnesses, Section::Witness, label, "scenario")? {
            WitnessSpec::Actions { left, right, horizon } => {
                Ok(MoritaWitness::new(self.action(left)?, self.action(right)?)?
                    .with_horizon(horizon.unwrap_or(default)))
            }
            WitnessSpec::DualPair {
                bivector,
                j1,
                j2,
                a1,
                a2,
                horizon,
            } => Ok(MoritaWitness::from_dual_pair(
                &self.bivector(bivector)?,
                self.map(j1)?,
                self.map(j2)?,
                self.algebroid(a1)?,
                self.algebroid(a2)?,
            )?
            .with_horizon(horizon.unwrap_or(default))),
        }
    }

    pub fn path(&self, label: &str) -> Result<APath> {
        match lookup(&self.file.paths, Section::Path, label, "scenario")? {
            PathSpec::Curve {
                algebroid,
                coefficients,
                base,
            } => {
                let c: Vec<&str> = coefficients.iter().map(String::as_str).collect();
                let b: Vec<&str> = base.iter().map(String::as_str).collect();
                APath::parse(self.algebroid(algebroid)?, &c, &b).map_err(|e| contextualize(e, label))
            }
            PathSpec::Concat { parts } => {
                let (first, rest) = parts
                    .split_first()
                    .ok_or_else(|| Error::InvalidPath(format!("path {label} concatenates nothing")))?;
                rest.iter()
                    .try_fold(self.path(first)?, |acc, p| acc.then(&self.path(p)?))
            }
        }
    }
}

fn contextualize(e: Error, context: &str) -> Error {
    match e {
        Error::Parse { position, message } => Error::Parse {
            position,
            message: format!("{context}: {message}"),
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    const MINIMAL: &str = r#"{
        "name": "minimal",
        "manifolds": { "R2": { "bounds": [[-1, 1], [-1, 1]] } },
        "algebroids": { "T": { "kind": "tangent", "chart": "R2" } },
        "checks": [ { "kind": "algebroid_axioms", "algebroid": "T" } ]
    }"#;

    fn bundled(name: &str) -> Scenario {
        load_scenario(format!("{}/scenarios/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
    }

    #[test]
    fn minimal_file_has_one_check() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.checks().len(), 1);
        let r = run_scenario(&s, &RunOptions::default());
        assert_eq!(r.reports[0].status, Status::Pass);
        assert_eq!(r.reports[0].id, "algebroid_axioms#1");
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn unknown_label_in_check_is_named() {
        let src = MINIMAL.replace(r#""algebroid": "T" }"#, r#""algebroid": "Q" }"#);
        match Scenario::from_json(&src) {
            Err(Error::UnresolvedLabel { label, .. }) => assert_eq!(label, "Q"),
            other => panic!("expected UnresolvedLabel, got {other:?}"),
        }
    }

    #[test]
    fn unknown_label_in_declaration_is_named() {
        let src = MINIMAL.replace(r#""chart": "R2" }"#, r#""chart": "R5" }"#);
        assert!(matches!(Scenario::from_json(&src), Err(Error::UnresolvedLabel { label, .. }) if label == "R5"));
    }

    #[test]
    fn cycles_are_rejected() {
        let src = r#"{
            "name": "cycle",
            "manifolds": { "R2": { "bounds": [[-1, 1], [-1, 1]] } },
            "algebroids": {
                "A": { "kind": "opposite", "of": "B" },
                "B": { "kind": "opposite", "of": "A" }
            }
        }"#;
        assert!(matches!(Scenario::from_json(src), Err(Error::CyclicDefinition(_))));
    }

    #[test]
    fn syntax_errors_carry_a_position() {
        let src = "{\n  \"name\": \"broken\",\n  \"checks\": [,]\n}";
        match Scenario::from_json(src) {
            Err(Error::Parse { position, .. }) => assert_eq!(&src[position..position + 1], ","),
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn bad_expressions_fail_at_load() {
        let src = r#"{
            "name": "bad",
            "manifolds": { "R2": { "bounds": [[-1, 1], [-1, 1]] } },
            "fields": { "f": { "chart": "R2", "kind": "scalar", "components": ["x1 +* 2"] } }
        }"#;
        match Scenario::from_json(src) {
            Err(Error::Parse { message, .. }) => assert!(message.starts_with("f:"), "{message}"),
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn schema_violations() {
        let unknown = MINIMAL.replace(r#""name": "minimal","#, r#""name": "minimal", "extra": 1,"#);
        assert!(matches!(Scenario::from_json(&unknown), Err(Error::SchemaViolation(_))));
        let missing = MINIMAL.replace(r#", "algebroid": "T""#, "");
        assert!(matches!(Scenario::from_json(&missing), Err(Error::SchemaViolation(_))));
        let wrong_count = r#"{
            "name": "w",
            "manifolds": { "R2": { "bounds": [[-1, 1], [-1, 1]] } },
            "fields": { "v": { "chart": "R2", "kind": "vector", "components": ["1"] } }
        }"#;
        assert!(matches!(
            Scenario::from_json(wrong_count),
            Err(Error::SchemaViolation(_))
        ));
    }

    #[test]
    fn coordinate_names_alias_variables() {
        let src = r#"{
            "name": "aliases",
            "manifolds": { "P": { "bounds": [[-1, 1], [-1, 1]], "coords": ["q", "p"] } },
            "fields": { "f": { "chart": "P", "kind": "vector", "components": ["p", "-q"] } }
        }"#;
        let s = Scenario::from_json(src).unwrap();
        let v = s.vector_field("f").unwrap();
        assert_eq!(v.eval(&[0.25, 0.5]).unwrap().as_slice(), &[0.5, -0.25]);
    }

    #[test]
    fn construction_failures_become_error_reports() {
        let r = run_scenario(&bundled("transversality_error.json"), &RunOptions::default());
        assert_eq!(r.reports.len(), 1);
        assert_eq!(r.reports[0].status, Status::Error);
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn bundled_dual_pair_has_six_passing_checks() {
        let s = bundled("dual_pair.json");
        assert_eq!(s.checks().len(), 6);
        let r = run_scenario(&s, &RunOptions::default());
        assert!(r.reports.iter().all(|c| c.status == Status::Pass), "{r:#?}");
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn nonclosed_gauge_fails_involutivity() {
        let r = run_scenario(&bundled("nonclosed_gauge.json"), &RunOptions::default());
        let graph = r.reports.iter().find(|c| c.id == "graph_of_B").unwrap();
        assert_eq!(graph.detail("involutivity").unwrap().status, Status::Fail);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn empty_check_list() {
        let s = Scenario::from_json(r#"{ "name": "empty" }"#).unwrap();
        let r = run_scenario(&s, &RunOptions::default());
        assert!(r.reports.is_empty());
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn option_precedence() {
        let src = r#"{
            "name": "opts",
            "defaults": { "tolerance": 1e-5, "samples": 10 },
            "manifolds": { "R1": { "bounds": [[-1, 1]] } },
            "algebroids": { "T": { "kind": "tangent", "chart": "R1" } },
            "paths": { "c": { "kind": "curve", "algebroid": "T", "coefficients": ["1"], "base": ["t"] } },
            "checks": [
                { "kind": "algebroid_axioms", "algebroid": "T", "tolerance": 1e-3 },
                { "kind": "algebroid_axioms", "algebroid": "T" }
            ]
        }"#;
        let s = Scenario::from_json(src).unwrap();
        let cli = Defaults {
            samples: Some(7),
            seed: Some(3),
            ..Defaults::default()
        };
        let first = s.options_for(&s.checks()[0], &cli);
        assert_eq!((first.tol, first.samples, first.seed), (1e-3, 7, 3));
        let second = s.options_for(&s.checks()[1], &Defaults::default());
        assert_eq!((second.tol, second.samples, second.seed), (1e-5, 10, 0));
        let bare = Scenario::from_json(r#"{ "name": "bare" }"#).unwrap();
        let mut ode = s.checks()[1].clone();
        ode.kind = CheckKind::ApathIntegrate;
        assert_eq!(bare.options_for(&ode, &Defaults::default()).tol, DEFAULT_ODE_TOLERANCE);
        assert_eq!(
            bare.options_for(&s.checks()[1], &Defaults::default()).tol,
            DEFAULT_TOLERANCE
        );
    }
}
