use std::fmt;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("no convergence; residuals {}", Residuals(.residuals))]
    ConvergenceFailure { residuals: Vec<f64> },
    #[error("node {0} has nonpositive degree")]
    IsolatedNode(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("requested {requested} eigenpairs but only {available} are available")]
    InsufficientRank { requested: usize, available: usize },
    #[error("dense kernel of order {n} exceeds the cap of {cap}")]
    DenseCapExceeded { n: usize, cap: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("loss became non-finite at iteration {iteration}")]
    DivergedRun { iteration: usize },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: missing value in column {column}")]
    MissingValue { line: usize, column: usize },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

struct Residuals<'a>(&'a [f64]);

impl fmt::Display for Residuals<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r:.3e}")?;
        }
        write!(f, "]")
    }
}

pub(crate) fn shape_err(what: &str, expected: (usize, usize), got: (usize, usize)) -> Error {
    Error::Shape(format!(
        "{what}: expected {}x{}, got {}x{}",
        expected.0, expected.1, got.0, got.1
    ))
}
