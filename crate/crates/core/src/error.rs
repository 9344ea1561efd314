use thiserror::Error;

/// Failure classes shared by every solver in the crate.
///
/// `TheoremViolation` is kept apart from the ordinary input errors: it means
/// a construction that is mathematically guaranteed to succeed did not, which
/// is either an implementation bug or a genuine mathematical event. Callers
/// must not fold it into "no solution".
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid selection: {0}")]
    InvalidSelection(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("statement is unsatisfiable: {0}")]
    UnsatisfiableStatement(String),
    #[error("theorem violation: {0}")]
    TheoremViolation(String),
    #[error("search budget of {budget} exhausted (best lower bound so far: {lower_bound})")]
    BudgetExceeded { budget: u64, lower_bound: usize },
    #[error("exhaustive oracle refused instance of length {len} (cap {cap})")]
    OracleTooLarge { len: usize, cap: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Parse {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn is_theorem_violation(&self) -> bool {
        matches!(self, Error::TheoremViolation(_))
    }
}
