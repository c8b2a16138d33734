use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("segment index {index} out of range for a {segments}-segment arm")]
    SegmentOutOfRange { index: usize, segments: usize },

    #[error("arc fraction {0} outside [0, 1]")]
    FractionOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("effective mass matrix is not positive definite")]
    SingularMassMatrix,

    #[error("dispersion relation did not converge for omega = {omega} rad/s, depth = {depth} m")]
    DispersionNoConvergence { omega: f64, depth: f64 },

    #[error("depth z = {z} m outside the water column [-{depth}, 0]")]
    OutsideWaterColumn { z: f64, depth: f64 },

    #[error("integrator step {step:e} s fell below the minimum at t = {t} s")]
    StepSizeUnderflow { t: f64, step: f64 },

    #[error("no static equilibrium reaches ({x}, {z}); residual {residual:e}")]
    NoEquilibrium { x: f64, z: f64, residual: f64 },

    #[error("baseline RMSE is zero; error ratio undefined")]
    ZeroBaselineError,

    #[error("unknown figure class `{0}`")]
    UnknownFigureClass(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
