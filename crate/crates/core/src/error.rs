use thiserror::Error;

/// Errors raised by field evaluation, checkers and constructions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value encountered at {coords:?}")]
    NonFiniteValue { coords: [f64; 3] },

    #[error("finite-difference stencil point {coords:?} leaves the chart")]
    StepOutOfChart { coords: [f64; 3] },

    #[error("coframe is singular at {coords:?} (|det| = {det:e})")]
    SingularCoframe { coords: [f64; 3], det: f64 },

    #[error("least-squares fit residual {residual:e} exceeds tolerance {tolerance:e}")]
    IllConditioned { residual: f64, tolerance: f64 },

    #[error("extracted K deviates from 1 by {deviation:e}")]
    NotUnitFlag { deviation: f64 },

    #[error("directional PDE system violated, residuals {residuals:?}")]
    PdeViolation { residuals: Vec<f64> },

    #[error("phi constraint violated, residuals {residuals:?}")]
    PhiConstraintViolation { residuals: Vec<f64> },

    #[error("rescaling function must be positive, found {min}")]
    NonPositiveV { min: f64 },

    #[error("lifted coframe fails the structure equations, residual {residual:e}")]
    LiftConventionFailure { residual: f64 },

    #[error("positivity functional has minimum {min} on the sample set")]
    PositivityViolation { min: f64 },

    #[error("curvature must be positive, got {k0}")]
    NonPositiveCurvature { k0: f64 },

    #[error("precondition violated: {condition} (residual {residual:e})")]
    PreconditionViolation { condition: String, residual: f64 },

    #[error("m vanishes at {coords:?}")]
    ZeroM { coords: [f64; 3] },

    #[error("parameter a = {a} must lie in (0, 1)")]
    OutOfRangeA { a: f64 },

    #[error("point {coords:?} lies on the singular locus")]
    SingularLocus { coords: [f64; 3] },

    #[error("quaternion has norm {norm}, expected 1")]
    NonUnit { norm: f64 },

    #[error("right translates left the chart after {attempts} attempts")]
    ChartExit { attempts: usize },

    #[error("point {im} is not in the upper half-plane")]
    NonHyperbolicPoint { im: f64 },

    #[error("unknown structure `{0}`")]
    UnknownStructure(String),

    #[error("point {coords:?} is outside the chart")]
    PointOutOfChart { coords: [f64; 3] },
}

pub type Result<T> = std::result::Result<T, Error>;
