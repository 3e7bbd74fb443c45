use thiserror::Error;

/// Errors shared by every module of the workbench.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("element kind {found} does not belong to a {expected} group")]
    ElementKindMismatch { expected: String, found: String },
    #[error("budget exceeded while computing {what} (reached radius {reached_radius})")]
    BudgetExceeded { what: String, reached_radius: usize },
    #[error("element is not in the subgroup")]
    NotInSubgroup,
    #[error("membership oracle returned Unknown")]
    OracleUnknown,
    #[error("no canonical form available: {0}")]
    NoCanonicalForm(String),
    #[error("integer overflow in {0}")]
    Overflow(String),
    #[error("too few samples ({got}, need at least {need})")]
    TooFewSamples { got: usize, need: usize },
    #[error("matrix is not hyperbolic (|trace| = {trace} <= 2)")]
    NotHyperbolic { trace: i64 },
    #[error("zero vector")]
    ZeroVector,
    #[error("vectors do not form a basis of Z^2 (determinant {det})")]
    NotABasis { det: i64 },
    #[error("function support leaves the normal-set domain")]
    SupportOutsideDomain,
    #[error("functions live on different group contexts")]
    ContextMismatch,
    #[error("no samples found: {0}")]
    NoSamplesFound(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("graph ill-formed: {0}")]
    GraphIllFormed(String),
    #[error("sequence ill-formed: {0}")]
    SequenceIllFormed(String),
    #[error("cannot parse word {word:?}: {reason}")]
    WordParse { word: String, reason: String },
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("embedding image {image} of edge {edge} is not accepted by its oracle")]
    EmbeddingOracleMismatch { edge: String, image: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn budget(what: impl Into<String>, reached_radius: usize) -> Self {
        Error::BudgetExceeded { what: what.into(), reached_radius }
    }
}
