use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported discriminant {0}")]
    UnsupportedDiscriminant(u64),

    #[error("maximal order certification failed: {0}")]
    Certification(String),

    /// An exactness or structural assertion failed; indicates an enumeration bug.
    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("class set incomplete: mass {found} != expected {expected}")]
    MassMismatch { found: String, expected: String },

    #[error("cache integrity check failed: {0}")]
    CacheIntegrity(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn consistency<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Consistency(msg.into()))
}
