use std::fmt;

/// Everything that can go wrong in this crate.
#[derive(Debug)]
pub enum Error {
    /// Malformed MatrixMarket input (bad header, short line, unparsable number).
    Parse { line: usize, msg: String },
    /// A row of P sums outside 1 +/- 1e-12, or carries a negative entry.
    Stochasticity { row: usize, detail: String },
    /// The same (row, col) coordinate appeared twice in the input.
    DuplicateEntry { row: usize, col: usize },
    DimensionMismatch { expected: String, got: String },
    /// QR received a block whose columns are all exactly zero.
    AllColumnsZero,
    /// An iterative kernel ran out of its sweep/iteration budget.
    NoConvergence { what: &'static str },
    /// Initial block generation failed to produce independent columns.
    DependentColumns,
    /// A non-finite value showed up mid-iteration.
    NumericalBreakdown { detail: String },
    /// Extracted vector carries negative mass beyond the clamp threshold;
    /// the subspace has not converged to anything meaningful yet.
    NegativeMass { min_entry: f64 },
    InvalidParameters { msg: String },
    /// Dense oracle hit a (numerically) singular system: reducible chain.
    SingularSystem,
    /// Detailed balance violated beyond tolerance.
    NotReversible { max_violation: f64 },
    /// Not enough usable checkpoints to fit a convergence rate.
    InsufficientData { points: usize },
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse { line, msg } => write!(f, "parse error at line {line}: {msg}"),
            Error::Stochasticity { row, detail } => {
                write!(f, "row {row} is not stochastic: {detail}")
            }
            Error::DuplicateEntry { row, col } => {
                write!(f, "duplicate entry at ({row}, {col})")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::AllColumnsZero => write!(f, "all input columns are zero"),
            Error::NoConvergence { what } => write!(f, "{what} did not converge"),
            Error::DependentColumns => {
                write!(f, "could not generate linearly independent start columns")
            }
            Error::NumericalBreakdown { detail } => write!(f, "numerical breakdown: {detail}"),
            Error::NegativeMass { min_entry } => {
                write!(f, "extracted vector has negative mass (min entry {min_entry:e})")
            }
            Error::InvalidParameters { msg } => write!(f, "invalid parameters: {msg}"),
            Error::SingularSystem => write!(f, "singular linear system (reducible chain?)"),
            Error::NotReversible { max_violation } => {
                write!(f, "chain violates detailed balance by {max_violation:e}")
            }
            Error::InsufficientData { points } => {
                write!(f, "only {points} usable checkpoints; need at least 5")
            }
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
