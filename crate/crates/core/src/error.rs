use thiserror::Error;

/// Everything that can go wrong while loading, solving or designing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse scenario: {0}")]
    Parse(String),

    #[error("invalid scenario: {0}")]
    Validation(String),

    #[error("invalid design: {0}")]
    Design(String),

    #[error("no active path for {what} demand {origin} -> {destination}")]
    NoActivePath {
        what: &'static str,
        origin: String,
        destination: String,
    },

    #[error("transfer {candidate}: fixed flow {forced} cannot fit capacity {capacity}")]
    InfeasibleCapacity {
        candidate: String,
        forced: f64,
        capacity: f64,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
