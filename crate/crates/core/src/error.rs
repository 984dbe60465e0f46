use thiserror::Error;

/// Errors raised anywhere in the lifting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("operator is not Hermitian (asymmetry {asymmetry:e} > {tolerance:e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("eigendecomposition failed to converge on a block of size {block}")]
    DecompositionFailure { block: usize },

    #[error("eigenvalue {value:e} outside the admissible interval [{lo:e}, {hi:e}]")]
    DomainViolation { value: f64, lo: f64, hi: f64 },

    #[error("operator is not positive definite (eigenvalue {value:e})")]
    NotPositiveDefinite { value: f64 },

    #[error("ball of radius {radius} has {size} elements, above the enumeration cap {cap}")]
    EnumerationCap { radius: usize, size: u128, cap: usize },

    #[error("no growth constant available for this group")]
    GrowthConstantUnavailable,

    #[error("insufficient points for a decay fit: {found} above the zero threshold, need {needed}")]
    InsufficientPoints { found: usize, needed: usize },

    #[error("module axiom violated: {what} residual {residual:e} > {tolerance:e}")]
    AxiomViolation { what: String, residual: f64, tolerance: f64 },

    #[error("degenerate module: every generator commutes with F")]
    DegenerateModule,

    #[error("averaged eigenvalue {value} breaches the domain bound {bound}; use a smaller scale")]
    DomainBreach { value: f64, bound: f64 },

    #[error("no admissible scale for the quantum metric")]
    NoAdmissibleScale,

    #[error("Theta is not invertible on its block (eigenvalue {value:e})")]
    ThetaNotInvertible { value: f64 },

    #[error("no positive lambda satisfies Theta >= lambda G")]
    NoPositiveLambda,

    #[error("sandwich constant for {generator} exceeds ceiling {ceiling:e} (witness {witness:e})")]
    SandwichUnbounded { generator: String, ceiling: f64, witness: f64 },

    #[error("inequality violated: {0}")]
    InequalityViolated(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
