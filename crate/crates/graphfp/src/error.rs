use thiserror::Error;

/// Errors produced by graph construction, generators, solvers and the
/// experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is outside its documented range. The message
    /// names the operation that rejected it.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A bandwidth or similar derived quantity degenerated to zero.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The proximity graph has more than one connected component. Components
    /// are reported as node-index lists.
    #[error("graph is disconnected: {} components, sizes {:?}", components.len(), components.iter().map(Vec::len).collect::<Vec<_>>())]
    Disconnected { components: Vec<Vec<usize>> },

    /// The requested parameter combination has no defined result
    /// (e.g. a Maxwellian at beta = 1).
    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    /// A numerical routine failed to meet its tolerance or produced values
    /// outside the admissible range.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Config or artifact text could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for validation problems, 3 for
    /// numerical failures, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::Degenerate(_)
            | Error::Disconnected { .. }
            | Error::Unsupported(_)
            | Error::Parse(_) => 2,
            Error::Numerical(_) => 3,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
