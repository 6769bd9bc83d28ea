use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian (max |A - A^dagger| = {0:e})")]
    NonHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace is not one (got {0})")]
    NotUnitTrace(f64),

    #[error("operator is not unitary (max |U^dagger U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("Bloch vector outside the unit ball (norm {0})")]
    BlochOutOfBall(f64),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("dual map is not unital (max |Phi^dagger(I) - I| = {0:e})")]
    ChannelNotUnital(f64),

    #[error("probability {0:e} is negative beyond round-off")]
    NegativeProbability(f64),

    #[error("distribution is not normalized (sum = {0})")]
    NotNormalized(f64),

    #[error("invalid partition: {0}")]
    BadPartition(String),

    #[error("mixing weight {0} outside [0, 1]")]
    BadMixingWeight(f64),

    #[error("distribution carries no energy labels")]
    MissingEnergies,

    #[error("inverse temperature must be non-negative (got {0})")]
    BetaNegative(f64),

    #[error("inverse temperature must be positive (got {0})")]
    BetaNonPositive(f64),

    #[error("operation requires sharp (projective) measurements")]
    NonSharpMeasurement,

    #[error("Gibbs state is not invertible at this temperature")]
    SingularGibbs,

    #[error("initial Hamiltonian is not traceless (trace {0})")]
    NotTraceless(f64),

    #[error("unsupported dimension {0}")]
    UnsupportedDim(usize),

    #[error("sharpness {0} outside [0, 1]")]
    SharpnessOutOfRange(f64),

    #[error("measurement Bloch vectors coincide; no saturating state")]
    DegenerateDirections,

    #[error("initial and final energy gaps differ ({0} vs {1})")]
    GapMismatch(f64, f64),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
