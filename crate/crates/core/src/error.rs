use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("outside theorem hypotheses: {0}")]
    OutsideHypotheses(String),

    #[error("no closed form for alpha = {0} (only alpha in {{1, 2}})")]
    NoClosedForm(f64),

    #[error("quadrature did not converge: residual estimate {residual:e} after {intervals} intervals")]
    Quadrature { residual: f64, intervals: usize },

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("positivity violated: value {value:e} at node {node} (threshold -1e-12)")]
    Positivity { value: f64, node: usize },

    #[error("monotone iteration violated at step {step}, node {node}: decrease {decrease:e}")]
    Monotonicity { step: usize, node: usize, decrease: f64 },

    #[error("non-finite nonlinearity value {value} at node {node}")]
    NonFinite { value: f64, node: usize },

    #[error("layer construction failed at k = {k}: {reason}")]
    Layer { k: usize, reason: String },

    #[error("unresolvable layers (radius < 2h): {0:?}")]
    Unresolvable(Vec<usize>),

    #[error("config error: {0}")]
    Config(String),

    #[error("missing columns in {path}: {columns:?}")]
    MissingColumns { path: String, columns: Vec<String> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the scenario runner: 2 for bad input, 3 for a
    /// numerical-structure failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precondition(_)
            | Error::OutsideHypotheses(_)
            | Error::NoClosedForm(_)
            | Error::GridMismatch(_)
            | Error::Layer { .. }
            | Error::Unresolvable(_)
            | Error::Config(_)
            | Error::MissingColumns { .. }
            | Error::Io(_) => 2,
            Error::Quadrature { .. }
            | Error::Eigen(_)
            | Error::Positivity { .. }
            | Error::Monotonicity { .. }
            | Error::NonFinite { .. } => 3,
        }
    }
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
