use thiserror::Error;

use crate::geometry::Point2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The spatial gradient vanishes, so the isoline frame is undefined.
    #[error("degenerate point{}: the field gradient vanishes, violating the regularity hypothesis grad D != 0", located(.at))]
    Degenerate { at: Option<(f64, Point2)> },

    #[error("finite-difference step {h:e} is below the resolvable limit {limit:e}")]
    StepUnderflow { h: f64, limit: f64 },

    #[error("no isoline crossing found along the search line within half-width {max_half_width:e}")]
    NoIntersection { max_half_width: f64 },

    #[error("root search did not converge after {iterations} iterations (residual {residual:e})")]
    RootNotConverged { iterations: usize, residual: f64 },

    #[error("extrapolated oracle estimates diverge (last correction {correction:e})")]
    OracleUnstable { correction: f64 },

    #[error("invalid field parameters: {0}")]
    InvalidField(String),

    #[error("invalid settings: {0}")]
    InvalidSettings(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("sample index {index} outside the admissible range [{lo}, {hi}]")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("field is not regular on the region: |grad D| = {grad_norm:e} < {threshold:e} at t = {t}, r = ({}, {})", r.x, r.y)]
    DegenerateRegion {
        t: f64,
        r: Point2,
        grad_norm: f64,
        threshold: f64,
    },

    #[error("invalid region: {0}")]
    InvalidRegion(String),
}

fn located(at: &Option<(f64, Point2)>) -> String {
    match at {
        Some((t, r)) => format!(" at t = {t}, r = ({}, {})", r.x, r.y),
        None => String::new(),
    }
}

impl Error {
    /// Attaches a space-time location to a [`Error::Degenerate`] error.
    pub fn at(self, t: f64, r: Point2) -> Self {
        match self {
            Error::Degenerate { at: None } => Error::Degenerate { at: Some((t, r)) },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
