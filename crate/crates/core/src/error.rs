use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    DanglingEndpoint { edge: String, vertex: String },
    #[error("duplicate edge id `{0}`")]
    DuplicateEdgeId(String),
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertexId(String),
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("graph is not connected")]
    NotConnected,
    #[error("vertex `{0}` has degree 1")]
    DegreeOne(String),
    #[error("expected {expected} edge signs, got {got}")]
    SignCountMismatch { expected: usize, got: usize },

    #[error("velocity on edge `{edge}` violates the strict sign condition at x = {at}")]
    SignViolation { edge: String, at: f64 },
    #[error("velocity on edge `{0}` is unbounded or lacks a constant tail")]
    UnboundedField(String),
    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    QuadratureFailure { tol: f64, estimate: f64 },
    #[error("value {value} outside the range [{lo}, {hi}] of the reparametrization")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("variable similarity matrices are only supported by the well-posedness checks")]
    UnsupportedVariableSimilarity,
    #[error("similarity matrix is singular at x = {0}")]
    SingularSimilarity(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("corner similarity matrix `{0}` is singular")]
    SingularCorner(&'static str),
    #[error("group criterion is only available for compact graphs (no external edges)")]
    NonCompact,
    #[error("boundary matrix (V0e, V0i) does not have full row rank ({rank} < {rows})")]
    RankDeficient { rank: usize, rows: usize },
    #[error("t0 = {t0} exceeds the admissible bound {bound}")]
    T0TooLarge { t0: f64, bound: f64 },
    #[error("unsupported boundary measure: {0}")]
    UnsupportedMeasure(String),

    #[error("problem is not well-posed: {0}")]
    NotWellPosed(String),
    #[error("time step {dt} exceeds the bound {bound}")]
    StepTooLarge { dt: f64, bound: f64 },
    #[error("vertex trace system is singular")]
    SingularVertexSolve,
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),
    #[error("io error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Attach an edge id to field-level errors raised before the id was known.
    pub fn with_edge(self, id: &str) -> Self {
        match self {
            Error::SignViolation { at, .. } => Error::SignViolation {
                edge: id.to_string(),
                at,
            },
            Error::UnboundedField(_) => Error::UnboundedField(id.to_string()),
            Error::Config(msg) => Error::Config(format!("edge `{id}`: {msg}")),
            other => other,
        }
    }

    /// Short machine-readable tag used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DanglingEndpoint { .. } => "DanglingEndpoint",
            Error::DuplicateEdgeId(_) => "DuplicateEdgeId",
            Error::DuplicateVertexId(_) => "DuplicateVertexId",
            Error::EmptyGraph => "EmptyGraph",
            Error::NotConnected => "NotConnected",
            Error::DegreeOne(_) => "DegreeOne",
            Error::SignCountMismatch { .. } => "SignCountMismatch",
            Error::SignViolation { .. } => "SignViolation",
            Error::UnboundedField(_) => "UnboundedField",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::UnsupportedVariableSimilarity => "UnsupportedVariableSimilarity",
            Error::SingularSimilarity(_) => "SingularSimilarity",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::SingularCorner(_) => "SingularCorner",
            Error::NonCompact => "NonCompact",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::T0TooLarge { .. } => "T0TooLarge",
            Error::UnsupportedMeasure(_) => "UnsupportedMeasure",
            Error::NotWellPosed(_) => "NotWellPosed",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::SingularVertexSolve => "SingularVertexSolve",
            Error::Precondition(_) => "Precondition",
            Error::Config(_) => "Config",
            Error::Io { .. } => "Io",
        }
    }
}
