use thiserror::Error;

/// Errors raised by the game engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A series did not converge within the term cap. `partial` holds the
    /// last partial sum.
    #[error("series did not converge after {terms} terms (partial value {partial})")]
    Convergence { terms: usize, partial: f64 },

    #[error("no sign change on the search interval: {0}")]
    NoRoot(String),

    #[error("state space of {states} exceeds the cap of {cap}; use the Monte Carlo engine instead")]
    Capacity { states: u128, cap: u128 },

    #[error("game cannot terminate: {0}")]
    Nontermination(String),

    #[error("linear program failed: {0}")]
    Solver(String),

    /// An engine error tagged with the strategy pair that produced it.
    #[error("evaluating {row} vs {col}: {source}")]
    Pair {
        row: String,
        col: String,
        #[source]
        source: Box<GameError>,
    },

    #[error("i/o: {0}")]
    Io(String),
}

impl GameError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        GameError::Argument(msg.into())
    }
}

impl From<std::io::Error> for GameError {
    fn from(e: std::io::Error) -> Self {
        GameError::Io(e.to_string())
    }
}

impl From<csv::Error> for GameError {
    fn from(e: csv::Error) -> Self {
        GameError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for GameError {
    fn from(e: serde_json::Error) -> Self {
        GameError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GameError>;
