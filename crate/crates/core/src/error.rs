use thiserror::Error;

use crate::asymptotics::AsymptoticPrediction;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coin is not unitary (deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("coin has a = 0; the closed forms require a nonzero transmitting amplitude")]
    ZeroTransmission,

    #[error("block length must be at least 1")]
    EmptyBlock,

    #[error("block of {sites} sites exceeds the limit of {limit}")]
    SizeOverflow { sites: usize, limit: usize },

    #[error("vector has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("frequency lies on the regime boundary; theta is undefined there")]
    BoundaryRegime,

    #[error("Chebyshev value U_{{{index}-1}} overflowed; use the log-scaled evaluation")]
    Overflow { index: usize },

    #[error("iterative eigenvalue estimate did not converge (residual {residual:.3e})")]
    ConvergenceFailure { residual: f64 },

    #[error("stationary system is singular at column {column}")]
    SingularSystem { column: usize },

    #[error("(T^(M-1))_22 vanishes at k = {k}")]
    DegenerateBoundary { k: f64 },

    #[error("inflow iteration did not converge after {steps} steps (last change {delta:.3e})")]
    NotConverged { steps: usize, delta: f64 },

    #[error("tail bound {bound:.3e} exceeds the requested precision {requested:.3e}")]
    TailTooHeavy { bound: f64, requested: f64 },

    #[error("moment order {0} is not supported (m must be 0, 1 or 2)")]
    UnsupportedMoment(u32),

    #[error("grid size {0} must be a power of two and at least 64")]
    InvalidGrid(usize),

    #[error(
        "grid doubling changed the quadrature from {coarse} to {fine} (tolerance {tolerance:.3e})"
    )]
    GridTooCoarse {
        coarse: f64,
        fine: f64,
        tolerance: f64,
    },

    #[error("site index {index} out of range for a block of {len} sites")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("asymptotic regime is ambiguous: {lower:?} vs {upper:?}")]
    AmbiguousRegime {
        lower: Box<AsymptoticPrediction>,
        upper: Box<AsymptoticPrediction>,
    },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("no root of the matching equation was found")]
    NoRoot,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}
