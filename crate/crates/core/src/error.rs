use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Numerical routine did not reach the requested accuracy.
    #[error("accuracy error: estimate {estimate_re}+{estimate_im}i with error {error:e} (requested {requested:e})")]
    Accuracy {
        estimate_re: f64,
        estimate_im: f64,
        error: f64,
        requested: f64,
    },

    #[error("not a frame: lower bound estimate {lower:e}, upper bound estimate {upper:e}")]
    NotAFrame { lower: f64, upper: f64 },

    #[error("iteration did not converge after {iterations} steps (spectral ratio {spectral_ratio:.6}, last update {last_update:e})")]
    NonConvergence {
        iterations: usize,
        spectral_ratio: f64,
        last_update: f64,
    },

    #[error("internal arithmetic invariant broken: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
