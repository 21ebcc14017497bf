use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Pauli label: unexpected {found:?} at position {position}")]
    PauliParse { position: usize, found: char },

    #[error("empty Pauli label")]
    EmptyLabel,

    #[error("qubit count mismatch: expected {expected}, got {found}")]
    QubitMismatch { expected: usize, found: usize },

    #[error("qubit count {0} out of range (1..=26)")]
    QubitRange(usize),

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitIndex { index: usize, n_qubits: usize },

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("non-Hermitian observable: imaginary expectation residue {0:e}")]
    NonHermitian(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("control and target are both qubit {0}")]
    SameQubit(usize),

    #[error("identity Pauli rotation is only a global phase")]
    IdentityRotation,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("graph parse error on line {line}: {message}")]
    GraphParse { line: usize, message: String },

    #[error("size guard exceeded: {what} = {value} > {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("parameter vector has length {found}, circuit expects {expected}")]
    ParamLength { expected: usize, found: usize },

    #[error("parameter slot {0} does not support the parameter-shift rule")]
    ShiftUnsupported(usize),

    #[error("non-finite objective value at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("regularized metric is singular (smallest eigenvalue {0:e}); increase the regularization")]
    SingularMetric(f64),

    #[error("Lanczos did not converge in {iterations} iterations; best Ritz values {estimates:?}")]
    NoConvergence { iterations: usize, estimates: Vec<f64> },

    #[error("optimizer aborted: {source}")]
    OptimizerAborted {
        #[source]
        source: Box<Error>,
        trace: Box<crate::optimizers::OptimizerTrace>,
    },
}
