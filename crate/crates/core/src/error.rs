use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("point is not normalizable onto the quadric (x.x = {norm2:e} <= 0){}", param_suffix(*.param))]
    NotNormalizable { norm2: f64, param: Option<f64> },

    #[error("plane section of the quadric is empty")]
    EmptySection,

    #[error("zero vector where a direction was required")]
    ZeroVector,

    #[error("curve is not an immersion near t = {t}")]
    Immersion { t: f64 },

    #[error("curve leaves the quadric near t = {t} (|x.x - 1| = {residual:e})")]
    OffQuadric { t: f64, residual: f64 },

    #[error("degenerate critical point: eigenvalue {eigenvalue:e} too close to zero")]
    Degenerate { eigenvalue: f64 },

    #[error("diagonal is not a non-degenerate critical manifold: induced form changes sign")]
    NonConstantType,

    #[error("curve is not space-like at t = {t} (f'.f' = {value:e})")]
    SpaceLikeViolation { t: f64, value: f64 },

    #[error("loop leaves the surface window at parameter {t}")]
    OutOfWindow { t: f64 },

    #[error("loop touches the singular locus of the surface at parameter {t}")]
    Singular { t: f64 },

    #[error("surface is not a ruled developable: {0}")]
    NonRuled(String),

    #[error("loop does not lie on the surface (distance {distance:e} at parameter {t})")]
    NotOnSurface { t: f64, distance: f64 },

    #[error("invalid fixture: {0}")]
    InvalidFixture(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no parallel pair found on the continuity intervals of the angle profile")]
    NotFound,

    #[error("parallel pairs form a continuous family")]
    ContinuumDetected,

    #[error("located pair fails the parallel check (angle {angle:e})")]
    ParallelCheckFailed { angle: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

fn param_suffix(param: Option<f64>) -> String {
    match param {
        Some(t) => format!(" at t = {t}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
