use thiserror::Error;

/// Errors raised by the percolate kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested mean measure is infinite; the caller should increase the truncation.
    #[error("divergent mean measure: {0}")]
    Divergence(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid start point: {0}")]
    InvalidStart(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A regular lattice could not be generated for the requested constants.
    #[error("infeasible lattice parameters: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dimension(d: usize) -> Result<()> {
    if d < 3 {
        return Err(Error::Unsupported(format!(
            "dimension {d}: only d >= 3 is supported"
        )));
    }
    Ok(())
}
