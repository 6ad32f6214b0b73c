use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected: site {0} is unreachable from site 0")]
    DisconnectedGraph(usize),

    #[error("site {site} is outside the graph (site count {site_count})")]
    SiteOutOfRange { site: usize, site_count: usize },

    #[error("empty support region")]
    EmptyRegion,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("unknown term id {0}")]
    UnknownTerm(usize),

    #[error("condition (i) violated: observable separation d = {d} must exceed R = {r}")]
    ConditionViolated { d: usize, r: usize },

    #[error("constants undefined for commuting system (K = 0)")]
    CommutingSystem,

    #[error("chain enumeration limited to n_max <= {limit}, requested {requested}")]
    EnumerationTooLarge { requested: usize, limit: usize },

    #[error("chain table covers n <= {available}; tolerance requires n = {required}")]
    InsufficientChainTable { available: usize, required: usize },

    #[error("Hilbert dimension {dim} exceeds the dense cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("cone not resolved; extend t_grid ({0})")]
    ConeNotResolved(String),

    #[error("eigendecomposition failed to converge")]
    Eigen,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error at \"{key}\": {message}")]
    Config { key: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
