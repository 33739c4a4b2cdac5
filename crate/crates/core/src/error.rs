use thiserror::Error;

/// Errors raised anywhere in the root-finding pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty coefficient sequence")]
    EmptyInput,
    #[error("leading coefficient is zero")]
    LeadingCoefficientZero,
    #[error("operation needs a polynomial of degree at least one")]
    DegreeZero,
    #[error("constant term is zero; strip the roots at the origin first")]
    ConstantTermZero,
    #[error("coefficient stream holds {available} values, {needed} needed")]
    InsufficientStream { needed: usize, available: usize },
    #[error("determinant order must be at least one")]
    InvalidOrder,
    #[error("cancellation exhausted {precision}-bit precision at k = {k}, r = {r}")]
    PrecisionExhausted {
        k: usize,
        r: usize,
        precision: usize,
    },
    #[error("ratio trace has {available} usable points, {needed} needed")]
    TooFewPoints { needed: usize, available: usize },
    #[error("product of order {r} did not converge")]
    GapInProducts { r: usize },
    #[error("power-sum system for the multiplicities is singular to working precision")]
    IllConditionedSystem,
    #[error("multiplicity {value} is not close to an integer (or sum is not the degree)")]
    NonIntegerMultiplicity { value: f64 },
    #[error("modulus ties remain unresolved after {shifts} shifts")]
    ShiftBudgetExhausted { shifts: usize },
    #[error("root {root} has residual {residual:e} above tolerance")]
    ResidualCheckFailed { root: String, residual: f64 },
    #[error("no strict modulus gap at position {r}")]
    NoModulusGap { r: usize },
    #[error("simultaneous iteration did not converge")]
    NoConvergence,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
