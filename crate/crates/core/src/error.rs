use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed user input: unknown labels, bad group specs, bad files.
    #[error("input error: {0}")]
    Input(String),

    /// Arguments outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An element was routed to the wrong branch of the classification.
    #[error("classification error: {0}")]
    Classification(String),

    /// Work would exceed the configured budget; carries the projected size.
    #[error("budget exceeded: projected {projected} > budget {budget} ({what})")]
    Budget {
        what: String,
        projected: u128,
        budget: u128,
    },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
