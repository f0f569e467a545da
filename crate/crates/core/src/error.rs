use thiserror::Error;

/// Failures surfaced by model construction, scoring, and estimation.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range. `name` identifies the
    /// offending field so CLI validation can point at it.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// Input exceeds the hard size cap of an exhaustive reference routine.
    #[error("{what}: input size {got} exceeds cap {cap}")]
    OverCap {
        what: &'static str,
        cap: usize,
        got: usize,
    },

    /// An input sequence has the wrong length for the given parameters.
    #[error("{what}: expected length {expected}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// The sample has no planted block to act on.
    #[error("sample has no planted blocks")]
    NoBlocks,

    /// A partition vector violates its shape requirements.
    #[error("bad partition: {0}")]
    BadPartition(String),

    /// A regression or root-finding step could not produce a result.
    #[error("estimation failed: {0}")]
    Estimation(String),
}
