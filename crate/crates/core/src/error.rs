use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("point {point:?} lies outside chart `{chart}`")]
    PointOutsideChart { chart: String, point: Vec<f64> },

    #[error("evaluation pole: {0}")]
    EvaluationPole(String),

    #[error("division by the zero expression")]
    DivisionByZero,

    #[error("chart mismatch: `{expected}` vs `{found}`")]
    ChartMismatch { expected: String, found: String },

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("algebroid mismatch: `{expected}` vs `{found}`")]
    AlgebroidMismatch { expected: String, found: String },

    #[error("rank mismatch: {0}")]
    RankMismatch(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("bivector fails the Poisson condition (max residual {residual:e})")]
    PoissonConditionFailed { residual: f64 },

    #[error("Lie algebra action is not a homomorphism (max residual {residual:e})")]
    ActionNotHomomorphism { residual: f64 },

    #[error("Dirac structure `{0}` is not certified")]
    DiracNotCertified(String),

    #[error("transversality fails at {point:?}: rank {rank}, need {needed}")]
    TransversalityFailed {
        point: Vec<f64>,
        rank: usize,
        needed: usize,
    },

    #[error("base points do not match: {0}")]
    BasePointMismatch(String),

    #[error("surjectivity fails at the fibered point: rank {rank}, need {needed}")]
    SurjectivityFailed { rank: usize, needed: usize },

    #[error("map is not a certified strong Dirac map: {0}")]
    NotCertifiedStrong(String),

    #[error("uniqueness failure: {0}")]
    UniquenessFailure(String),

    #[error("pullback fiber meets T_xX + 0 non-trivially at {point:?} (dimension {dim})")]
    IntersectionNontrivial { point: Vec<f64>, dim: usize },

    #[error("projected field {field} depends on the fiber (residual {residual:e})")]
    ProjectionIllDefined { field: usize, residual: f64 },

    #[error("initial point is not over the path start (offset {offset:e})")]
    InitialFiberMismatch { offset: f64 },

    #[error("integrator step collapsed at t = {t}")]
    StepCollapse { t: f64 },

    #[error("A-path is invalid: {0}")]
    InvalidPath(String),

    #[error("no connecting path: {0}")]
    NoConnectingPath(String),

    #[error("singular symbolic system: {0}")]
    SingularSystem(String),

    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("unresolved label `{label}` ({context})")]
    UnresolvedLabel { label: String, context: String },

    #[error("cyclic definition through `{0}`")]
    CyclicDefinition(String),

    #[error("schema violation: {0}")]
    SchemaViolation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
