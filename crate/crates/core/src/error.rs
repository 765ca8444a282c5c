use thiserror::Error;

/// Errors raised by the algebraic and geometric kernels.
///
/// Vertex and letter indices carried here are 1-based, matching what users
/// type on the command line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    Shape { rows: usize, cols: usize },

    #[error("matrix is not skew-symmetric at ({i}, {j})")]
    NotSkewSymmetric { i: usize, j: usize },

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("row {row} of the C-matrix mixes signs")]
    SignIncoherent { row: usize },

    #[error("row {row} of the C-matrix is zero")]
    ZeroRow { row: usize },

    #[error("sequence is not reduced: positions {position} and {next} repeat vertex {vertex}")]
    NotReduced { position: usize, next: usize, vertex: usize },

    #[error("ordering is not a permutation of 1..={n}")]
    BadOrdering { n: usize },

    #[error("induced subquiver on {vertices:?} has a directed cycle")]
    Cyclic { vertices: Vec<usize> },

    #[error("quiver is not a fork")]
    NotAFork,

    #[error("after step {step} (vertex {vertex}) the quiver is no longer a fork with that point of return")]
    ForkLost { step: usize, vertex: usize },

    #[error("quiver is not complete: b[{i}][{j}] = 0")]
    Incomplete { i: usize, j: usize },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("malformed reflection word: {0}")]
    MalformedReflection(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("expected rank 3, got rank {n}")]
    NotRank3 { n: usize },

    #[error("descent and BFS disagree: {0}")]
    ClassifierDisagreement(String),

    #[error("degenerate crossing: {0}")]
    DegenerateCrossing(String),

    #[error("no curve found within bound {bound}")]
    CurveNotFound { bound: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
