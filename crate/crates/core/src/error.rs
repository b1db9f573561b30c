use thiserror::Error;

/// Errors raised anywhere in the reconstruction stack.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("modulus is not irreducible over the base field")]
    NotIrreducible,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic {p} is too small for degree {d}")]
    CharTooSmall { p: u64, d: usize },
    #[error("field too small: {0}")]
    FieldTooSmall(String),
    #[error("need at least {need} points, got {got}")]
    InsufficientPoints { need: usize, got: usize },
    #[error("duplicate abscissa")]
    DuplicateAbscissa,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("no consistent codeword")]
    NoConsistentCodeword,
    #[error("sparsity bound {0} exceeded")]
    SparsityExceeded(usize),
    #[error("matrix is singular")]
    Singular,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("no solution")]
    NoSolution,
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("both polynomials are constant in the elimination variable")]
    BothConstantInVar,
    #[error("instance exceeds solver scale: {0}")]
    ScaleExceeded(String),
    #[error("random shifts exhausted")]
    RandomShiftExhausted,
    #[error("search exhausted without a certificate: {0}")]
    SearchExhausted(String),
    #[error("not representable with fan-in {0}")]
    NotRepresentable(usize),
    #[error("rank exceeds bound {0}")]
    RankExceedsBound(usize),
    #[error("budget exhausted: {0}")]
    BudgetExceeded(String),
    #[error("reconstruction failed: {0}")]
    ReconstructionFailed(String),
    #[error("tensor too large for dense storage: {0} entries")]
    TensorTooLarge(u128),
    #[error("candidate rejected: {0}")]
    CandidateRejected(String),
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("input is identically zero")]
    ZeroInput,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
