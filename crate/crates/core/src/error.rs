use thiserror::Error;

/// Errors raised by the simulation, analysis and experiment layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("control and target coincide on qubit {0}")]
    ControlIsTarget(usize),

    #[error("control pattern has {pattern} bits but the control register has {register} qubits")]
    PatternLength { pattern: usize, register: usize },

    #[error("gate qubits overlap between control register and inner gate")]
    OverlappingQubits,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("amplitude vector of length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("amplitudes contain a non-finite value")]
    NonFinite,

    #[error("expectation value has imaginary residue {0:e}; observable path is not Hermitian")]
    ImaginaryResidue(f64),

    #[error("dense representation requested for {0} qubits; limit is 12")]
    TooManyQubits(usize),

    #[error("dense matrix dimension {0} exceeds the limit of 64")]
    DimensionTooLarge(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parameter (layer {layer}, qubit {qubit}) is out of range")]
    ParamOutOfRange { layer: usize, qubit: usize },

    #[error("parameter (layer {layer}, qubit {qubit}) belongs to the frozen block")]
    FrozenParameter { layer: usize, qubit: usize },

    #[error("unsupported partition {0:?}; only (1), (1,1) and (2) have closed forms here")]
    UnsupportedPartition(Vec<i64>),

    #[error("malformed partition {0:?}")]
    MalformedPartition(Vec<i64>),

    #[error("cannot take the logarithm of non-positive variance {0}")]
    NonPositiveVariance(f64),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
