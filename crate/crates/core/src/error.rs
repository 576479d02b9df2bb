use thiserror::Error;

/// Errors produced by the simulator and its analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("matrix is not unitary (max |U^dag U - I| = {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("size limit exceeded: {what} = {value} (limit {limit})")]
    SizeLimit {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("index {index} out of bounds for dimension {bound}")]
    IndexOutOfBounds { index: usize, bound: usize },

    #[error("photon number mismatch: expected {expected}, got {got}")]
    PhotonMismatch { expected: usize, got: usize },

    #[error("gram matrix rejected: {0}")]
    InvalidGram(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("duplicate input mode {0}")]
    DuplicateInput(usize),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("chi-square test is degenerate: {0}")]
    DegenerateTest(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable numeric code per error class, used by file loaders and the CLI.
    pub fn code(&self) -> u8 {
        match self {
            Error::Dimension(_) => 10,
            Error::InvalidConfig(_) => 11,
            Error::NotUnitary { .. } => 12,
            Error::SizeLimit { .. } => 13,
            Error::IndexOutOfBounds { .. } => 14,
            Error::PhotonMismatch { .. } => 15,
            Error::InvalidGram(_) => 16,
            Error::Domain(_) => 17,
            Error::DuplicateInput(_) => 18,
            Error::EmptyInput(_) => 19,
            Error::DegenerateTest(_) => 20,
            Error::Numerical(_) => 21,
            Error::Parse(_) => 22,
            Error::Io(_) => 23,
        }
    }

    /// True for errors caused by bad user input rather than runtime failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
