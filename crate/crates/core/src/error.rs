use thiserror::Error;

/// Errors produced by the order book models, solvers and harnesses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("tick size mismatch: {0} vs {1}")]
    TickMismatch(f64, f64),

    #[error("event budget of {budget} events exhausted at t = {time}")]
    EventBudget { budget: u64, time: f64 },

    #[error("solver diverged: {0}")]
    Divergence(String),

    #[error("scheme error: {0}")]
    Scheme(String),

    #[error("time {0} outside solved range [0, {1}]")]
    Range(f64, f64),

    #[error("stationary solution undefined at x = {0}: source is positive where decay vanishes")]
    UndefinedStationary(f64),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("order of size {requested} exceeds available depth {available}")]
    DepthExceeded { requested: f64, available: f64 },

    #[error("infeasible liquidation: {0}")]
    Infeasible(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
