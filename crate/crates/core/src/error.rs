use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("singular matrix: pivot {pivot} below threshold")]
    Singular { pivot: usize },
    #[error("singular configuration: points {0} and {1} coincide")]
    Coincident(usize, usize),
    #[error("degenerate configuration: upsilon = {0:e} below evaluation floor")]
    Degenerate(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite integrand at node {index} ({re}, {im})")]
    Integration { index: usize, re: f64, im: f64 },
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("precision error: {0}")]
    Precision(String),
}

pub type Result<T> = std::result::Result<T, Error>;
