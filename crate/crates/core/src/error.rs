use thiserror::Error;

/// Every failure the laboratory can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state is within the singular set of `{system}`: {reason}")]
    SingularState { system: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("sampling box is empty or entirely singular: {0}")]
    EmptyBox(String),

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("system `{system}` requires parameter `{name}`")]
    MissingParameter { system: String, name: String },

    #[error("parameter `{name}` of `{system}` must be nonzero")]
    ZeroParameter { system: String, name: String },

    #[error("parameter `{name}` is invalid: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("system `{system}` requires function `{name}`")]
    MissingFunction { system: String, name: String },

    #[error("f''(R) vanishes; the (a, R) mass block is singular")]
    ZeroSecondDerivative,

    #[error("system `{0}` has no potential (not Hamiltonian)")]
    NotHamiltonian(String),

    #[error("system `{0}` admits no gradient homothetic vector")]
    NoHomothety(String),

    #[error("metric is singular at the requested point (|det| = {det:e})")]
    SingularMetric { det: f64 },

    #[error("mass matrix is degenerate (|det| = {det:e})")]
    DegenerateMassMatrix { det: f64 },

    #[error("no root in the search interval: {0}")]
    NoRoot(String),

    #[error("the exponential Noether branch requires mu != 0")]
    ZeroMu,

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("maximum number of steps ({0}) exceeded")]
    MaxStepsExceeded(usize),

    #[error("invalid integrator settings: {0}")]
    InvalidController(String),

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("rho(t) is not positive at t = {0}")]
    RhoNonPositive(f64),

    #[error("nu(T) is not positive at T = {0}")]
    NuNonPositive(f64),

    #[error("state outside the chart domain: {0}")]
    DomainViolation(String),

    #[error("degenerate coupling: c / sqrt(6k) = 1")]
    DegenerateCoupling,

    #[error("invalid function specification: {0}")]
    InvalidFunction(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
