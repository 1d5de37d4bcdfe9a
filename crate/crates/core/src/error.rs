use thiserror::Error;

/// Errors raised by the numerical kernels, schemes and bound calculators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("degenerate Gaussian law: {0}")]
    Degenerate(String),

    #[error("corrupted scheme state at step {step}: alpha = {alpha}")]
    CorruptedState { step: usize, alpha: f64 },

    #[error("scan for {what} found no crossing below {ceiling} ({diagnostics})")]
    ScanOverflow {
        what: &'static str,
        ceiling: usize,
        diagnostics: String,
    },

    #[error("converse context at N' = {n_prime} is inadmissible: {reason}")]
    InadmissibleContext { n_prime: usize, reason: String },

    #[error("{}", config_message(.line, .message))]
    Config {
        line: Option<usize>,
        message: String,
    },

    #[error("assertion violated: {0}")]
    Assertion(String),

    #[error("i/o error: {0}")]
    Io(String),
}

fn config_message(line: &Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("config line {l}: {message}"),
        None => format!("config: {message}"),
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        op,
        detail: detail.into(),
    }
}
