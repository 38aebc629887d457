use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("coordinate singularity: {0}")]
    CoordinateSingularity(String),

    #[error("exceptional parameters: {quantity} = {value:e} at (k, l) = ({k}, {l})")]
    Exceptional {
        quantity: &'static str,
        value: f64,
        k: i64,
        l: i64,
    },

    #[error("singular transform: {0}")]
    Singular(String),

    #[error("{what} did not converge after {} iterations (last {:e})", history.len(), history.last().copied().unwrap_or(f64::NAN))]
    Convergence { what: String, history: Vec<f64> },

    #[error("accuracy check failed: {0}")]
    Accuracy(String),

    #[error("resolution lost: {0}")]
    Aliasing(String),
}

pub type Result<T> = std::result::Result<T, Error>;
