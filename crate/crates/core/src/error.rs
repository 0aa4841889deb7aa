use thiserror::Error;

/// Errors shared by the ring, module, building and graph layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed input: {0}")]
    Parse(String),

    #[error("invalid field descriptor: {}", .0.join("; "))]
    InvalidDescriptor(Vec<String>),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u64,
        limit: u64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal verification failed: {0}")]
    Verification(String),

    #[error("no germ at {to} extends the germ at {from}")]
    NoExtension { from: usize, to: usize },

    #[error("{count} germs at {to} extend the germ at {from}")]
    NotUnique { from: usize, to: usize, count: usize },
}

impl Error {
    pub fn budget(what: &'static str, needed: u64, limit: u64) -> Self {
        Error::BudgetExceeded {
            what,
            needed,
            limit,
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
