use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {diff:e}")]
    NonSymmetric { i: usize, j: usize, diff: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    ConvergenceFailure { sweeps: usize, off_norm: f64 },
    #[error("eigenvectors are not orthonormal (Gram deviation {deviation:e})")]
    NonOrthonormal { deviation: f64 },
    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("eigenvalue {index} is zero; matrix is singular")]
    Singular { index: usize },
    #[error("reference vector is zero")]
    ZeroReference,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("eigenvalues {first} and {second} coincide")]
    DegenerateSpectrum { first: usize, second: usize },
    #[error("matrix or spectrum is empty")]
    Empty,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BitsError {
    #[error("value {value} is not representable with {width} bits")]
    NotRepresentable { value: f64, width: u32 },
    #[error("value {value} lies outside [0, 1)")]
    OutOfRange { value: f64 },
    #[error("invalid bit string {0:?}")]
    InvalidBitString(String),
    #[error("bit width {0} is outside 1..=52")]
    BadWidth(u32),
    #[error("eigenvalues {first} and {second} share the bit string {bits}")]
    DegenerateSpectrum { first: usize, second: usize, bits: String },
    #[error("bit strings have mixed widths ({expected} vs {found})")]
    MixedWidths { expected: u32, found: u32 },
    #[error("invalid rotation label {0:?}")]
    InvalidRotationLabel(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("register length {0} is not a positive power of two")]
    BadDimension(usize),
    #[error("qubit {qubit} is not valid here (register has {n_qubits} qubits)")]
    BadQubit { qubit: usize, n_qubits: usize },
    #[error("{0} qubits exceed the dense simulation limit of 20")]
    TooManyQubits(usize),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("outcome {outcome} has probability {probability:e}, below the collapse threshold")]
    ImpossibleOutcome { outcome: String, probability: f64 },
    #[error("ancilla register is not in a definite basis state")]
    AncillasNotReset,
    #[error("rotation power {0} is not a power of two")]
    BadPower(u64),
    #[error("ancilla {0} is assigned twice in one iteration")]
    DuplicateAncilla(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractionError {
    #[error("no viable outcome for path {path} at iteration {iteration}")]
    InconsistentBranch { path: String, iteration: u32 },
    #[error("ancilla budget of {budget} exceeded at iteration {iteration}")]
    AncillaBudgetExceeded { budget: usize, iteration: u32 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructionError {
    #[error("extracted eigenvalue {0} has no post-selected distribution")]
    MissingPath(String),
    #[error("sign search over {entries} free entries exceeds the limit of 20")]
    SearchSpaceTooLarge { entries: usize },
    #[error("sign pattern is ambiguous: gap {gap:e} <= threshold {threshold:e}")]
    AmbiguousSigns {
        gap: f64,
        threshold: f64,
        best: Box<crate::reconstruction::SignPattern>,
    },
    #[error("eigenvalue {0} is zero")]
    ZeroEigenvalue(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HhlError {
    #[error("post-selection on the rotation ancilla has probability {0:e}")]
    PostSelectionNull(f64),
    #[error("rotation constant {c} must lie in (0, {phi_min}]")]
    InvalidConstant { c: f64, phi_min: f64 },
    #[error("clock register left entangled (leakage {0:e})")]
    MiddleEntangled(f64),
    #[error("vector is zero")]
    ZeroVector,
    #[error("clock register of {0} qubits exceeds the limit of 12")]
    ClockTooLarge(u32),
    #[error(transparent)]
    Sim(#[from] SimError),
}
