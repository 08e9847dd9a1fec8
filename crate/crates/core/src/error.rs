use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("the zero quaternion does not define a rotation")]
    ZeroQuaternion,
    #[error("homogeneous coordinates are all zero")]
    ZeroPoint,
    #[error("exceptional point: Δ(x)/|(x,y)|² = {0:e} is too small")]
    ExceptionalPoint(f64),
    #[error("matrix is not a proper rotation (error {0:e})")]
    NotRotation(f64),
    #[error("M Rᵀ is not skew-symmetric (error {0:e})")]
    NotSkew(f64),
    #[error("point violates the blow-up equations (residual {0:e})")]
    NotOnBlowup(f64),
    #[error("point violates the Study quadric (residual {0:e})")]
    NotOnQuadric(f64),
    #[error("boundary limit did not converge (last step {0:e})")]
    NoConvergence(f64),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("mode {mode} is not an operation mode of {architecture}")]
    ModeArchitecture { mode: String, architecture: String },
    #[error("mode generator data is only valid for k1 = 1, k2 = 3/2")]
    NonDefaultGeometry,
    #[error("invalid joint lengths: {0}")]
    InvalidLengths(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("solver failure: {0}")]
    Solver(String),
}
