use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("degenerate column {column}: {reason}")]
    DegenerateColumn { column: usize, reason: String },

    /// The activation pattern cannot be inverted.
    #[error("not identifiable: {0} (the pattern needs K >= N and full column rank)")]
    Identifiability(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("aggregation error: {0}")]
    Aggregation(String),

    #[error("plan error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Plan { line: Option<usize>, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn identifiability(k: usize, n: usize) -> Self {
        Error::Identifiability(format!("K = {k} blocks is smaller than N = {n} RIS elements"))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
