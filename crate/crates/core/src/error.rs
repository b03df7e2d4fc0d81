use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unphysical Bloch vector: |r| = {0}")]
    UnphysicalBloch(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("incomplete Kraus set: max |sum E^dag E - I| = {0:e}")]
    IncompleteKraus(f64),

    #[error("off-diagonal affine response {0:e} exceeds tolerance")]
    OffDiagonalResponse(f64),

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("malformed ensemble spec: {0}")]
    Spec(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
