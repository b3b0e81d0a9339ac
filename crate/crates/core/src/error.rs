use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: self-loop on `{user}`")]
    SelfLoop { line: usize, user: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown topic `{0}`")]
    UnknownTopic(String),

    #[error("unknown hashtag `{0}`")]
    UnknownHashtag(String),

    #[error("`{user}` never used `{hashtag}`")]
    NotAnAdopter { user: String, hashtag: String },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("degenerate training data: {0}")]
    Degenerate(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("graph is not strongly connected: {reachable} of {total} ordered pairs reachable")]
    NotStronglyConnected { reachable: usize, total: usize },

    #[error("enumeration budget exceeded: C({n}, {k}) > {bound}")]
    BudgetExceeded { n: usize, k: usize, bound: u64 },

    #[error("invariant violated: {0}")]
    Invariant(String),
}
