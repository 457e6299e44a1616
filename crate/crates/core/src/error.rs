use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    #[error("component `{component}`: {source}")]
    Parse { component: &'static str, source: ParseError },
    #[error("invalid field spec: {0}")]
    FieldSpec(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("xi vanishes at {point:?}; the plane is undefined there")]
    SingularXi { point: [f64; 3] },
    #[error("direction is not in the plane (|<xi, dir>| = {residual:e})")]
    NotInPlane { residual: f64 },
    #[error("chart axis {axis} is degenerate at {point:?}")]
    ChartMismatch { axis: usize, point: [f64; 3] },
    #[error("state is not on the criminant (F = {f:e}, F_p = {fp:e})")]
    NotOnCriminant { f: f64, fp: f64 },
    #[error("point is not parabolic (K = {k:e})")]
    NotParabolic { k: f64 },
    #[error("every direction is asymptotic at {point:?}")]
    DegenerateDirections { point: [f64; 3] },
    #[error("gradient of K vanishes at {point:?}")]
    DegenerateGradient { point: [f64; 3] },
    #[error("Newton iteration did not converge after {iterations} steps")]
    NoConvergence { iterations: usize },
    #[error("point is not cuspidal (phi = {phi:e})")]
    NotCuspidal { phi: f64 },
    #[error("K does not change sign in the box")]
    EmptySurface,
    #[error("continuation seed did not converge onto the special curve")]
    SeedNotConverged,
    #[error("constraint Jacobian is rank deficient at {point:?}")]
    RankDeficient { point: [f64; 3] },
    #[error("start point is not hyperbolic (K = {k:e})")]
    StartNotHyperbolic { k: f64 },
    #[error("integration step fell below the minimum at t = {t}")]
    StepFailure { t: f64 },
    #[error("integration failed: {0}")]
    IntegrationFailure(String),
    #[error("curve has {len} samples, at least {min} are needed")]
    TooShort { len: usize, min: usize },
    #[error("{artifact} cannot be written as {format}")]
    IncompatibleFormat { artifact: &'static str, format: &'static str },
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
