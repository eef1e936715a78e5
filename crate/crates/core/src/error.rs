use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("test-vector difference xi_{k} - xi_{l} is not resolvable by the characteristic function")]
    OffLattice { k: usize, l: usize },

    #[error("constraint point ({0}, {1}) is not a lattice point")]
    ConstraintOffLattice(f64, f64),

    #[error("matrix is not Hermitian (max |M - M^H| = {0:e})")]
    NotHermitian(f64),

    #[error("sample selection is empty")]
    EmptySelection,

    #[error("{0} samples give tube radii of at least one; need N >= 25")]
    TooFewSamples(usize),

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error(
        "solver stopped after {iterations} iterations (primal residual {primal_residual:e}, \
         dual residual {dual_residual:e}, gap {gap:e})"
    )]
    NotConverged {
        iterations: usize,
        primal_residual: f64,
        dual_residual: f64,
        gap: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("missing field: {0}")]
    Missing(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
