use thiserror::Error;

/// Errors raised by the algebra and synthesis layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unsupported factor {0}: roots lie on both sides of the unit circle")]
    UnsupportedFactor(String),
    #[error("the zero element has no order or normal form")]
    ZeroElement,
    #[error("division by zero")]
    ZeroDivisor,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("entry ({0}, {1}) is improper")]
    ImproperEntry(usize, usize),
    #[error("matrix is not over the ring of proper stable rational functions: entry ({0}, {1})")]
    NotOverS(usize, usize),
    #[error("bad time range: t = {t} < tau = {tau}")]
    BadRange { t: i64, tau: i64 },
    #[error("no constant feedback solution: {0}")]
    NoConstantSolution(String),
    #[error("constant solution exists but is not block diagonal")]
    NotBlockDiagonal,
    #[error("list length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("diagonal column {0} has no nonzero entry")]
    ZeroColumn(usize),
    #[error("pruned Hermite form is singular")]
    SingularDeltaStar,
    #[error("system is not stable; supply stabilizing gains and decouple the stabilized system")]
    NotStable,
    #[error("system is not output reachable")]
    NotOutputReachable,
    #[error("decoupling problem is not solvable: {0}")]
    NotSolvable(String),
    #[error("no candidate lists satisfy the solvability conditions")]
    NotFound,
    #[error("candidate search exceeded its iteration bound of {0}; result is inconclusive")]
    BoundExceeded(usize),
    #[error("compensator construction failed at step {step}: {reason}")]
    ConstructionFailed { step: u32, reason: String },
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
