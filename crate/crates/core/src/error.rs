use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sign pattern error: {0}")]
    Pattern(String),

    #[error("sign change could not be resolved: {0}")]
    Resolution(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("integration diverged at t = {t}")]
    Divergence { t: f64 },

    #[error("eigenvalue bracketing failed: {0}")]
    Bracketing(String),

    #[error("solution cannot be classified: {0}")]
    Unclassifiable(String),

    #[error("winding number undefined: displacement vanishes near {0:?}")]
    DegreeUndefined((f64, f64)),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Domain(_) | Error::Io(_) => 2,
            Error::Pattern(_) | Error::Hypothesis(_) => 3,
            _ => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::Domain(_) => "domain",
            Error::Pattern(_) => "pattern",
            Error::Resolution(_) => "resolution",
            Error::Hypothesis(_) => "hypothesis",
            Error::Divergence { .. } => "divergence",
            Error::Bracketing(_) => "bracketing",
            Error::Unclassifiable(_) => "unclassifiable",
            Error::DegreeUndefined(_) => "degree-undefined",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
