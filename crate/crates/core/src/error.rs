use thiserror::Error;

/// Every failure the library reports. The CLI maps these onto exit codes via
/// [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    /// A comparison whose truth is not decidable from the stored digits.
    #[error("precision exhausted: {0}")]
    Precision(String),

    /// A sign that is neither structurally forced nor numerically separated
    /// from zero.
    #[error("undecidable at stored precision: {0}")]
    Undecidable(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("inconsistent data: {0}")]
    Inconsistent(String),

    #[error("scan exhausted: found {found} of {requested} solutions with N <= {scan_limit}")]
    ScanExhausted {
        found: usize,
        requested: usize,
        scan_limit: u64,
    },

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("infinite count at p = {p} (zero mean index of {name})")]
    InfiniteMorseNumber { p: i64, name: String },
}

impl Error {
    /// Process exit status for this error: 1 check failure, 2 usage or parse,
    /// 3 precision, 4 scan exhaustion.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Invalid(_) => 2,
            Error::Precision(_) | Error::Undecidable(_) => 3,
            Error::ScanExhausted { .. } => 4,
            Error::Hypothesis(_)
            | Error::Inconsistent(_)
            | Error::CheckFailed(_)
            | Error::InfiniteMorseNumber { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
