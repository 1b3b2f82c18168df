use thiserror::Error;

/// Everything that can go wrong while building a model, simulating, or
/// solving. CLI exit codes are derived from [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the domain closure (excess {excess:.3e})")]
    DomainViolation { point: [f64; 3], excess: f64 },

    #[error("point {point:?} is not on the boundary (distance {distance:.3e})")]
    NotOnBoundary { point: [f64; 3], distance: f64 },

    #[error("projection of {point:?} onto the domain is not unique")]
    DegenerateProjection { point: [f64; 3] },

    #[error("radius {r} exceeds the admissible radius {max}")]
    InvalidRadius { r: f64, max: f64 },

    #[error("point at boundary distance {distance} lies outside the collar of width {width}")]
    OutOfCollar { distance: f64, width: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("path {index}: {source}")]
    Path { index: u64, source: Box<Error> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical instability: {0}")]
    Instability(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Exit code convention: 2 for configuration problems, 3 for numerical
    /// failures. Inequality violations (4) are not errors; the runner decides.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
