use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("basis size must be at least 1")]
    EmptyBasis,
    #[error("index {index} out of range for basis of size {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("point ({0}, {1}) lies outside the chart")]
    OutOfChart(f64, f64),
    #[error("quadrature resolution ({0}, {1}) is degenerate; each component must be >= 2")]
    DegenerateResolution(usize, usize),
    #[error("geometry mismatch: basis is on {basis}, grid is on {grid}")]
    GeometryMismatch { basis: String, grid: String },
    #[error("penalty height must be positive and finite, got {0}")]
    InvalidPotential(f64),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("requested {requested} eigenpairs from a matrix of dimension {dim}")]
    InvalidModeCount { requested: usize, dim: usize },
    #[error("eigensolver failed to converge on matrix of dimension {dim}")]
    NoConvergence { dim: usize },
    #[error("cannot bracket root {k}: V0 = {v0} does not exceed pi^2 k^2")]
    Unbracketed { k: usize, v0: f64 },
    #[error("need at least {needed} eigenvalues, got {got}")]
    TooFewEigenvalues { needed: usize, got: usize },
    #[error("eigenvalues are not in ascending order at position {0}")]
    Unsorted(usize),
    #[error("spacing must be non-negative, got {0}")]
    NegativeSpacing(f64),
    #[error("sample is empty")]
    EmptySample,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
