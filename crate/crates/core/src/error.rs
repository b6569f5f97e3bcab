use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the crate. Parse errors carry the
/// 1-based line number of the offending input line.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("vertex {vertex} out of range for graph with {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),

    #[error("edge {{{u}, {v}}} has non-positive weight {weight}")]
    NonPositiveWeight { u: usize, v: usize, weight: f64 },

    #[error("clustering has {got} labels but the graph has {expected} vertices")]
    LengthMismatch { got: usize, expected: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("graph has no edges")]
    EdgelessGraph,

    #[error("requested {k} classes for a graph with {n} vertices")]
    TooManyClasses { k: usize, n: usize },

    #[error("minimum cut needs at least two vertices")]
    CutTooSmall,

    #[error("measure needs at least two clusters, got {0}")]
    TooFewClusters(usize),

    #[error("every cluster is a singleton, so no intra-cluster diameter exists")]
    NoIntraPairs,

    #[error("meta-clustering is not a partition of 0..{expected}: {detail}")]
    BadPartition { expected: usize, detail: String },

    #[error("similarity matrix is not symmetric with a zero diagonal: {0}")]
    BadSimilarityMatrix(String),

    #[error("vertex {0} is already labeled")]
    AlreadyLabeled(usize),

    #[error("vertex {0} is not covered by the current snapshot")]
    NotInSnapshot(usize),

    #[error("{0}")]
    Unsupported(String),
}
