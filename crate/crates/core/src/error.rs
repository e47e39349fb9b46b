//! Error types shared across the engine.

/// Unified error type for parsing, evaluation, algebra, and catalog loading.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The input text violates the expression grammar.
    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },

    /// An identifier is neither a declared coordinate, parameter, nor function.
    #[error("unknown identifier `{name}` (declared: {declared:?})")]
    UnknownIdent { name: String, declared: Vec<String> },

    /// Evaluation hit a name with no binding in the point.
    #[error("unbound name `{0}` during evaluation")]
    Unbound(String),

    /// Evaluation left the domain of a sub-function (ln of a nonpositive
    /// number, Ei1 of zero, division by zero, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A sampling box cannot produce valid points (exclusions unsatisfiable
    /// or the expression faults everywhere). Distinct from a false verdict.
    #[error("bad sampling box: {0}")]
    BadBox(String),

    /// Operands live on different charts.
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),

    /// A multivector degree precondition failed.
    #[error("degree error: {0}")]
    Degree(String),

    /// Catalog schema violation or malformed entry data.
    #[error("catalog error: {0}")]
    Catalog(String),

    /// A parameter value is out of range or explicitly excluded.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Generators are linearly dependent where independence is required.
    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    /// An operation that requires a verified Jacobi structure was called on
    /// an unverified one.
    #[error("structure unverified: run verify_jacobi first")]
    Unverified,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
