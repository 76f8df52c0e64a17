use thiserror::Error;

use crate::solitary::IterationTrace;
use crate::state::StatePair;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("grid mismatch: operands live on grids with {left} and {right} modes")]
    GridMismatch { left: usize, right: usize },

    #[error("non-finite coefficient encountered")]
    NonFinite,

    /// `det S(k)` vanishes (relative to the matrix scale) at wavenumber `k`.
    /// The speed lies inside the discrete linear spectrum.
    #[error("singular mode at k = {wavenumber}: det S = {det:e}")]
    SingularMode { wavenumber: f64, det: f64 },

    #[error("denominator <F(Z), Z> collapsed to {value:e} at iteration {iteration}")]
    DenominatorCollapse { iteration: usize, value: f64 },

    #[error("no convergence after {} iterations (last residual {:e})", .trace.iterations_used, .trace.last_residual().unwrap_or(f64::NAN))]
    NonConvergence {
        trace: Box<IterationTrace>,
        last: Box<StatePair>,
    },

    #[error("extrapolation coefficients sum to {sum:e}, too small relative to {scale:e}")]
    DegenerateSum { sum: f64, scale: f64 },

    #[error("decay window holds {points} usable points above the amplitude floor")]
    WindowUnderflow { points: usize },

    #[error("time step failed at t = {time}: non-finite state")]
    StepFailed { time: f64 },

    #[error("configuration error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
