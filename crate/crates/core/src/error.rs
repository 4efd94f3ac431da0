use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// [`Error::name`] gives the stable identifier used in CLI error records and
/// by the C ABI.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("operation not supported for generator {0}")]
    UnsupportedGenerator(String),

    #[error("root is not bracketed: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Bracket { f_lo: f64, f_hi: f64 },

    #[error("root finder did not reach tolerance within {0} iterations")]
    Convergence(usize),

    #[error("invalid generator for this operation: {0}")]
    Generator(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("maximum entry is not unique")]
    Tie,

    #[error("{what} = {value} outside [{lo}, {hi}]")]
    Range {
        what: &'static str,
        value: usize,
        lo: usize,
        hi: usize,
    },

    #[error("problem size {size} exceeds the limit {limit}")]
    Size { size: usize, limit: usize },

    #[error("found {0} sign changes where exactly one was expected")]
    MultipleCrossings(usize),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "DomainError",
            Error::UnsupportedGenerator(_) => "UnsupportedGenerator",
            Error::Bracket { .. } => "BracketError",
            Error::Convergence(_) => "ConvergenceError",
            Error::Generator(_) => "GeneratorError",
            Error::Input(_) => "InputError",
            Error::Tie => "TieError",
            Error::Range { .. } => "RangeError",
            Error::Size { .. } => "SizeError",
            Error::MultipleCrossings(_) => "MultipleCrossings",
        }
    }
}
