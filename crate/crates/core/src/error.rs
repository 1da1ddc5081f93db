use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degree {requested} exceeds the available bound {available}")]
    DegreeOverflow { requested: usize, available: usize },

    #[error("basis size overflows for n = {n}, t = {t}")]
    SizeOverflow { n: usize, t: usize },

    #[error("degenerate interval [{lo}, {hi}]")]
    DegenerateInterval { lo: f64, hi: f64 },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error(
        "moment matrix is ill-conditioned (estimate {condition:e} > {threshold:e}); \
         rescale the data to [-1, 1]^d"
    )]
    IllConditioned { condition: f64, threshold: f64 },

    #[error("polynomial is not in the interior of the cone ({reason})")]
    NotInInterior { reason: String, iterations: usize },

    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:e})")]
    MaxIterations {
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI when reporting failures.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyInput => "EmptyInput",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DegreeOverflow { .. } => "DegreeOverflow",
            Error::SizeOverflow { .. } => "SizeOverflow",
            Error::DegenerateInterval { .. } => "DegenerateInterval",
            Error::InvalidRegion(_) => "InvalidRegion",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::NotInInterior { .. } => "NotInInterior",
            Error::MaxIterations { .. } => "MaxIterations",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }

    /// True for failures of the numerics rather than of the inputs' shape.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::IllConditioned { .. }
                | Error::NotInInterior { .. }
                | Error::MaxIterations { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
