use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Gram or constraint matrix is singular; `dependent` lists the offending members.
    #[error("singular matrix: dependent members {dependent:?}")]
    Singular { dependent: Vec<String> },

    #[error("numerical non-convergence: {what} (achieved {achieved:e}, wanted {wanted:e})")]
    NonConvergence {
        what: String,
        achieved: f64,
        wanted: f64,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad inputs rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::Unsupported(_)
                | Error::InvalidInput(_)
                | Error::Json(_)
        )
    }
}
