use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("empty graph")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("node id {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HopError {
    /// A shortest path is longer than the entry type can store below its
    /// unreachable sentinel.
    #[error(
        "hop distance {hops} from node {node} does not fit a {bits}-bit hop entry (max finite {max})"
    )]
    HopOverflow {
        node: usize,
        hops: u32,
        bits: u32,
        max: u32,
    },
    #[error("hop matrix for {n} nodes ({bytes} bytes) cannot be allocated")]
    Capacity { n: usize, bytes: u128 },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("dim must be at least 1")]
    Dim,
    #[error("alpha must lie in (0, 1), got {0}")]
    Alpha(f64),
    #[error("drop_prob must lie in [0, 1], got {0}")]
    DropProb(f64),
    #[error("epsilon_scale must be a finite non-negative number, got {0}")]
    Epsilon(f64),
    #[error("max_iters must be at least 1")]
    MaxIters,
    #[error("batch_size must be at least 1")]
    BatchSize,
    #[error("plateau_tol must be a finite non-negative number, got {0}")]
    PlateauTol(f64),
    #[error("initial positions are {rows}x{cols}, expected {n}x{dim}")]
    Shape {
        rows: usize,
        cols: usize,
        n: usize,
        dim: usize,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Hops(#[from] HopError),
    #[error("non-finite {what} for node {node} at iteration {iteration}")]
    NonFinite {
        node: usize,
        iteration: u64,
        what: &'static str,
    },
}
