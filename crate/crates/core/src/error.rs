use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("gate {kind} takes {expected} parameter(s), got {got}")]
    Arity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid sector: {particles} particle(s) on {sites} site(s)")]
    InvalidSector { sites: usize, particles: usize },

    #[error("invalid qubit placement: {0}")]
    InvalidPlacement(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("binding has {got} value(s), circuit has {expected} free parameter(s)")]
    BindingLength { expected: usize, got: usize },

    #[error("gate kind {0} has no elementary decomposition")]
    Undecomposable(&'static str),

    #[error("system too large for dense treatment: {qubits} qubits (limit {limit})")]
    TooLarge { qubits: usize, limit: usize },

    #[error("target state lies outside the circuit's particle sector (overlap {0})")]
    TargetOutsideSector(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
