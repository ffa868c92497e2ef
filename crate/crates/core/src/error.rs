use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("label `{0}` appears on both operands")]
    LabelCollision(String),

    #[error("label `{0}` is not part of the register")]
    UnknownLabel(String),

    #[error("duplicate label `{0}` in register")]
    DuplicateLabel(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("registers differ: {0:?} vs {1:?}")]
    RegisterMismatch(Vec<String>, Vec<String>),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("partial trace must keep at least one label")]
    EmptyKeep,

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("Bell index {0} out of range 0..=3")]
    BellIndex(u8),

    #[error("Pauli strings act on {0} and {1} qubits")]
    PauliLength(usize, usize),

    #[error("cannot parse Pauli string `{0}`")]
    PauliParse(String),

    #[error("state is not an eigenstate of {generator} (expectation {expectation})")]
    NotEigenstate { generator: String, expectation: String },

    #[error("instrument is incomplete (residual {0:e})")]
    IncompleteInstrument(f64),

    #[error("states {0} and {1} are not orthogonal (overlap {2:e})")]
    NotOrthogonal(usize, usize, f64),

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("rows {0} and {1} of the sign table coincide")]
    Indistinguishable(usize, usize),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("prefix code needs at least one word")]
    NoWords,

    #[error("resource pair is not in the Bell state Φ⁰ (fidelity {0})")]
    ResourceNotBell(f64),

    #[error("generator {0} cannot be measured with a two-party parity gadget")]
    NotTwoParty(String),

    #[error("ensemble state {0} is not maximally entangled across the cut")]
    NotMaximallyEntangled(usize),

    #[error("sets have different sizes ({0} vs {1})")]
    CardinalityMismatch(usize, usize),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
