//! Library error type.
//!
//! Every fallible operation in this crate returns [`Result`]. Variants are
//! coarse on purpose: callers branch on the *kind* of failure (bad geometry,
//! bad parameterization, numeric breakdown), not on payload details.

/// Errors produced by coverage analysis and planning routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A link distance collapsed below the minimum valid range, or an input
    /// describes a geometry the path-loss model cannot evaluate.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// The closed-form outage path needs an integer fading shape.
    #[error("closed-form outage needs a positive integer shape, got {0}")]
    UnsupportedShape(f64),

    /// The general product-CDF series is singular when the two shape
    /// parameters differ by (nearly) an integer.
    #[error("shape difference {0} is within {1} of an integer; series is singular")]
    SingularParameterization(f64, f64),

    /// A complex-arithmetic evaluation failed to cancel its imaginary part.
    #[error("imaginary residual {0:.3e} exceeds tolerance; evaluation unstable")]
    NumericalInstability(f64),

    /// A closed form only holds for part of the parameter domain.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// The coverage grid clipped the covered region; enlarge the extent.
    #[error("covered cells touch the grid boundary; enlarge the grid extent")]
    GridTooSmall,

    /// A parameter set failed construction-time validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
