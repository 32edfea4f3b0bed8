use thiserror::Error;

use crate::params::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A spectral parameter lies outside `T₋ ∪ T₊` (or outside `[-1, 1]`).
    #[error("{what} = {value} is outside the admissible domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("parameter validation failed: {}", list_violations(.0))]
    InvalidParameters(Vec<Violation>),

    #[error("threshold condition |phi22| = |omega22| does not hold (|phi22| = {phi22}, |omega22| = {omega22})")]
    NotThreshold { phi22: f64, omega22: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("operation requires strong-shift parameters: {0}")]
    UnsupportedMode(&'static str),

    #[error("{steps} steps would carry mass {edge_mass:e} across the window edge (N = {half_width}, tolerance {tolerance:e})")]
    LightCone {
        steps: usize,
        half_width: usize,
        edge_mass: f64,
        tolerance: f64,
    },

    #[error("window mismatch: {0}")]
    WindowMismatch(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code, printed by the CLI on failure.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "E_DOMAIN",
            Error::InvalidParameters(_) => "E_PARAMS",
            Error::NotThreshold { .. } => "E_THRESHOLD",
            Error::Precondition(_) => "E_PRECONDITION",
            Error::UnsupportedMode(_) => "E_UNSUPPORTED_MODE",
            Error::LightCone { .. } => "E_LIGHT_CONE",
            Error::WindowMismatch(_) => "E_WINDOW",
            Error::InvalidWindow(_) => "E_WINDOW",
            Error::Parse(_) => "E_PARSE",
            Error::Io(_) => "E_IO",
        }
    }

    /// True for errors caused by malformed configuration rather than by the math.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::Io(_) | Error::InvalidWindow(_))
    }
}

fn list_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
