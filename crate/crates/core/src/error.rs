use thiserror::Error;

/// Errors raised while building codes, designing quantizers or decoding.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("rate {target} not achievable, achievable range is [{min:.4}, {max:.4}]")]
    UnachievableRate { target: String, min: f64, max: f64 },
    #[error("parity part of the base graph is rank deficient over GF(2)")]
    RankDeficient,
    #[error("invalid length: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("instance too large for exhaustive search: {count} candidates exceed {limit}")]
    TooLarge { count: u128, limit: u128 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("design format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
