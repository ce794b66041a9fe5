//! Error type shared across the library.

/// Everything that can go wrong outside of plain contract violations
/// (those panic via `assert!`).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A support set was empty where transmittable directions are required.
    #[error("empty support set: {0}")]
    EmptySupport(String),

    /// Matrix or index dimensions do not line up.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A pattern assignment does not cover the graph it is evaluated on.
    #[error("incomplete assignment: {0}")]
    IncompleteAssignment(String),

    /// The effective channel cannot be zero-forced.
    #[error("effective channel is rank deficient")]
    RankDeficient,

    /// Exhaustive enumeration was refused to guard against exponential blowup.
    #[error("exhaustive search refused: {vertices} vertices exceed the cap of {cap}")]
    OracleCap { vertices: usize, cap: usize },

    /// Invalid argument or file content without a useful line number.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Malformed text input, with the 1-based line it was found on.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Experiment configuration violations, one message per field.
    #[error("invalid config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
