use thiserror::Error;

/// Errors surfaced by graph, dynamics, and analysis operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node id {id} out of range for a graph with {n} nodes")]
    NodeOutOfRange { id: usize, n: usize },

    #[error(
        "self-loop edge ({0}, {0}) not allowed; self-influence lives on the weight matrix diagonal"
    )]
    SelfLoop(usize),

    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("matrix is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, expected 1 within {tol}")]
    RowSum { row: usize, sum: f64, tol: f64 },

    #[error("zero diagonal entry at row {row}; every node must weight its own state")]
    ZeroDiagonal { row: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state vectors must be nonempty and share one dimension")]
    RaggedState,

    #[error("epsilon must be strictly positive, got {0}")]
    NonPositiveEps(f64),

    #[error("diameter undefined: graph is not strongly connected")]
    DiameterUndefined,

    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("ergodicity coefficient needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("no exponent h <= {d_max} with positive ergodicity coefficient; broken precondition")]
    NoErgodicExponent { d_max: usize },

    #[error("stop threshold value must be >= 1, got {0}")]
    InvalidThreshold(usize),

    #[error("coupling weight omega[{index}] = {value} outside [0, 1]")]
    OmegaOutOfRange { index: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
