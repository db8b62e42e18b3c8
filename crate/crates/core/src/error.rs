use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An operation that requires a DAG found a directed cycle.
    #[error("input graph contains a directed cycle")]
    CyclicInput,
    /// A sequence had the wrong length for the poset it was checked against.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    /// A query was issued for a pair that is not an edge of the query graph
    /// (or is filtered out of the current session view).
    #[error("({u}, {v}) is not a queryable edge")]
    NotAnEdge { u: u32, v: u32 },
    /// Charging the next query would exceed the session budget.
    #[error("query budget exceeded")]
    BudgetExceeded,
    /// Generator parameters admit no instance.
    #[error("unsatisfiable parameters: {0}")]
    Unsatisfiable(String),
    /// A query answer contradicts the supplied linear extension.
    #[error("query result contradicts the linear extension at ({u}, {v})")]
    InconsistentExtension { u: u32, v: u32 },
    /// An operation that needs a nonempty input received an empty one.
    #[error("empty input")]
    EmptyInput,
    /// The known edge set handed to the extension counter has a cycle.
    #[error("known edges contain a directed cycle")]
    CycleInKnownEdges,
    /// Exact extension counting was requested above the subset-DP cap.
    #[error("n = {n} exceeds the exact counting cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    /// No threshold index satisfies the gap conditions for this OPT estimate.
    #[error("no feasible weight threshold for the given OPT estimate")]
    NoFeasibleThreshold,
    /// The requested algorithm cannot run on the instance's model.
    #[error("algorithm `{algo}` cannot run on a `{model}` instance")]
    ModelMismatch { algo: String, model: String },
    /// Malformed or out-of-range parameters.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// A report aggregation had too little data to work with.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// Wrapper for I/O and serialization failures in the bench harness.
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
