use thiserror::Error;

/// Every failure the engine can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("unknown identifier `{name}` at byte {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("variable `{name}` at byte {position} exceeds dimension {n}")]
    IndexOutOfRange { name: String, position: usize, n: usize },
    #[error("vector field component {component} depends on y")]
    YVariableInVectorField { component: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("domain guard violated (guard value {value:e})")]
    GuardViolation { value: f64 },
    #[error("requested jet order exceeds the supported truncation: {0}")]
    TruncationOrderExceeded(String),
    #[error("multi-index outside the jet specification: {0}")]
    OrderOutOfSpec(String),
    #[error("finite-difference stencil leaves the domain")]
    StencilLeavesDomain,
    #[error("fundamental tensor not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("degenerate flag (Gram determinant ratio {ratio:e})")]
    DegenerateFlag { ratio: f64 },
    #[error("indicatrix quadrature did not converge (error estimate {estimate:e})")]
    QuadratureNotConverged { estimate: f64 },
    #[error("mean Cartan torsion vanishes (|I| = {norm:e})")]
    MeanCartanVanishes { norm: f64 },
    #[error("flow left the domain at t = {t}")]
    FlowLeftDomain { t: f64 },
    #[error("Richardson extrapolation diverged (estimate {estimate:e})")]
    ExtrapolationDiverged { estimate: f64 },
    #[error("vector field is not projective (residual {residual:.3e})")]
    NotProjective { residual: f64 },
    #[error("vector field is not I-invariant (residual {residual:.3e})")]
    NotIInvariant { residual: f64 },
    #[error("insufficient samples: {got} accepted, {need} required")]
    InsufficientSamples { got: usize, need: usize },
    #[error("trajectory left the domain at t = {t}")]
    LeftDomain { t: f64 },
    #[error("integration step underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sample rejected: {0}")]
    SampleRejected(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("engine consistency error: {0}")]
    Engine(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
