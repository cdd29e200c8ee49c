use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh validity error: {0}")]
    MeshValidity(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("mesh generator failed: {0}")]
    Generator(String),

    #[error("hierarchy error: {0}")]
    Hierarchy(String),

    #[error("degenerate element {element}: {msg}")]
    DegenerateElement { element: usize, msg: String },

    #[error("unsupported quadrature order {0} (maximum is 20)")]
    UnsupportedOrder(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
