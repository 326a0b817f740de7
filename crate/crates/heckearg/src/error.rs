use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("eigenvalue table too short: need primes up to {needed}, have {have}")]
    TableTooShort { needed: u64, have: u64 },
    #[error("path passes near a zero: |L| = {modulus:.3e} at sigma = {sigma}")]
    NearZero { sigma: f64, modulus: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("eigensystems not separated: forms {0} and {1}")]
    Collision(usize, usize),
    #[error("sign mismatch for form {form}: modular symbols give {symbols}, functional equation fit gives {fitted}")]
    SignMismatch { form: usize, symbols: i32, fitted: i32 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cache format: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
