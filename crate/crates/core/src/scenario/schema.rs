//! Serde mirror of the scenario JSON format.
//!
//! Declarations are keyed by label within their section. Expressions are
//! strings in the grammar of [`crate::calculus::parse_expr`], over `x1..xn`
//! or the coordinate names declared for the chart; path expressions use `t`.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::action::Side;
use crate::dirac::DiracMapMode;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub defaults: Defaults,
    #[serde(default)]
    pub manifolds: BTreeMap<String, ManifoldSpec>,
    #[serde(default)]
    pub fields: BTreeMap<String, FieldSpec>,
    #[serde(default)]
    pub maps: BTreeMap<String, MapSpec>,
    #[serde(default)]
    pub algebroids: BTreeMap<String, AlgebroidSpec>,
    #[serde(default)]
    pub morphisms: BTreeMap<String, MorphismSpec>,
    #[serde(default)]
    pub dirac: BTreeMap<String, DiracSpec>,
    #[serde(default)]
    pub dirac_maps: BTreeMap<String, DiracMapSpec>,
    #[serde(default)]
    pub actions: BTreeMap<String, ActionSpec>,
    #[serde(default)]
    pub quotients: BTreeMap<String, QuotientSpec>,
    #[serde(default)]
    pub witnesses: BTreeMap<String, WitnessSpec>,
    #[serde(default)]
    pub paths: BTreeMap<String, PathSpec>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    pub tolerance: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub horizon: Option<f64>,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub bounds: Vec<[f64; 2]>,
    #[serde(default)]
    pub coords: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Scalar,
    Vector,
    OneForm,
    TwoForm,
    Bivector,
}

/// Two-forms and bivectors list their `i < j` components row by row.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub chart: String,
    pub kind: FieldKind,
    pub components: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub source: String,
    pub target: String,
    pub components: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgebroidSpec {
    Tangent {
        chart: String,
    },
    Zero {
        chart: String,
    },
    Cotangent {
        bivector: String,
    },
    Transformation {
        chart: String,
        /// `constants[upper(i,j)][k] = C^k_ij`.
        constants: Vec<Vec<f64>>,
        /// Vector-field labels, one per Lie algebra generator.
        fields: Vec<String>,
    },
    Dirac {
        dirac: String,
    },
    Opposite {
        of: String,
    },
    Frame {
        chart: String,
        anchor: Vec<String>,
        /// One component list per pair `i < j`, in row order.
        structure: Vec<Vec<String>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MorphismSpec {
    Identity {
        algebroid: String,
    },
    Anchor {
        algebroid: String,
        tangent: String,
    },
    Differential {
        source: String,
        target: String,
        map: String,
    },
    Scaled {
        of: String,
        factor: String,
    },
    Matrix {
        source: String,
        target: String,
        base_map: String,
        /// Rows indexed by the target frame, entries over the source chart.
        matrix: Vec<Vec<String>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub vector: Vec<String>,
    pub form: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiracSpec {
    GraphOfBivector { bivector: String },
    GraphOfTwoForm { two_form: String },
    Frame { chart: String, sections: Vec<SectionSpec> },
    Gauge { of: String, two_form: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiracMapSpec {
    pub source: String,
    pub target: String,
    pub map: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActionSpec {
    Fields {
        algebroid: String,
        momentum: String,
        side: Side,
        /// Components of `X_i` over the momentum source, one list per frame element.
        fields: Vec<Vec<String>>,
        horizon: Option<f64>,
    },
    UniqueLift {
        algebroid: String,
        momentum: String,
    },
    InducedDirac {
        dirac_map: String,
    },
    Witness {
        witness: String,
        side: Side,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotientSpec {
    pub projection: String,
    pub section: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WitnessSpec {
    Actions {
        left: String,
        right: String,
        horizon: Option<f64>,
    },
    DualPair {
        bivector: String,
        j1: String,
        j2: String,
        a1: String,
        a2: String,
        horizon: Option<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSpec {
    Curve {
        algebroid: String,
        coefficients: Vec<String>,
        base: Vec<String>,
    },
    Concat {
        parts: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    AlgebroidAxioms,
    Morphism,
    PullbackFiber,
    FiberedProduct,
    Dirac,
    Gauge,
    DiracMap,
    InducedAction,
    Action,
    Module,
    UniqueLift,
    LeafAction,
    QuasiEquivalence,
    StrongMorita,
    TensorDistribution,
    ApathValid,
    ApathIntegrate,
    TransportInvariances,
    PsiTransport,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::AlgebroidAxioms => "algebroid_axioms",
            CheckKind::Morphism => "morphism",
            CheckKind::PullbackFiber => "pullback_fiber",
            CheckKind::FiberedProduct => "fibered_product",
            CheckKind::Dirac => "dirac",
            CheckKind::Gauge => "gauge",
            CheckKind::DiracMap => "dirac_map",
            CheckKind::InducedAction => "induced_action",
            CheckKind::Action => "action",
            CheckKind::Module => "module",
            CheckKind::UniqueLift => "unique_lift",
            CheckKind::LeafAction => "leaf_action",
            CheckKind::QuasiEquivalence => "quasi_equivalence",
            CheckKind::StrongMorita => "strong_morita",
            CheckKind::TensorDistribution => "tensor_distribution",
            CheckKind::ApathValid => "apath_valid",
            CheckKind::ApathIntegrate => "apath_integrate",
            CheckKind::TransportInvariances => "transport_invariances",
            CheckKind::PsiTransport => "psi_transport",
        }
    }

    /// Kinds whose residuals come out of the ODE integrator.
    pub fn ode_backed(self) -> bool {
        matches!(
            self,
            CheckKind::ApathIntegrate | CheckKind::TransportInvariances | CheckKind::PsiTransport
        )
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionSpec {
    pub embedding: String,
    pub quotient: String,
}

/// One check; which target fields are required depends on `kind`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub id: Option<String>,
    pub kind: CheckKind,
    pub algebroid: Option<String>,
    pub morphism: Option<String>,
    #[serde(default)]
    pub morphisms: Vec<String>,
    pub dirac: Option<String>,
    pub two_form: Option<String>,
    pub dirac_map: Option<String>,
    pub mode: Option<DiracMapMode>,
    pub action: Option<String>,
    pub quotient: Option<String>,
    pub witness: Option<String>,
    #[serde(default)]
    pub witnesses: Vec<String>,
    pub path: Option<String>,
    pub map: Option<String>,
    pub point: Option<Vec<f64>>,
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    pub expected: Option<Vec<f64>>,
    pub module_morphism: Option<String>,
    pub composition: Option<CompositionSpec>,
    pub tolerance: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub horizon: Option<f64>,
    pub step: Option<f64>,
    pub time_samples: Option<usize>,
}
