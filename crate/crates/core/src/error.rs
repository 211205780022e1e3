use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |a - a^†| = {asymmetry:e}")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e}")]
    NotPositive { eigenvalue: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("state vector is not normalized: norm² = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid qubit selection: {0}")]
    InvalidSelection(String),

    #[error("qubit count mismatch: {0} vs {1}")]
    QubitCountMismatch(usize, usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("missing tomography settings: {0}")]
    MissingSettings(String),

    #[error("malformed payload: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
