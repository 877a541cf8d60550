use alloc::string::String;

/// Errors raised by the analytics core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("jump transform evaluated at its pole: u = {u} >= rate {rate}")]
    TransformPole { u: f64, rate: f64 },

    #[error("Riccati solution blew up at t = {time}")]
    BlowUp { time: f64 },

    #[error("ODE integration failed to meet tolerance at t = {time}: {reason}")]
    Convergence { time: f64, reason: &'static str },

    #[error("no closed form for this parameter regime")]
    UnsupportedRegime,

    #[error("limit u -> -inf did not converge (last increment {last_increment:e})")]
    LimitNotConverged { last_increment: f64 },

    #[error("date ordering violated: {0}")]
    Ordering(&'static str),

    #[error("tenor {tenor} lies outside the curve range [{first}, {last}]")]
    TenorOutOfRange { tenor: f64, first: f64, last: f64 },

    #[error("curves have no overlapping tenor range")]
    TenorRangeMismatch,

    #[error("curve needs at least {required} tenors, got {got}")]
    TooFewTenors { required: usize, got: usize },

    #[error("least-squares system is rank deficient")]
    RankDeficient,

    #[error("fitted discount factor {value} at tenor {tenor} is not positive")]
    NegativeDiscount { tenor: f64, value: f64 },

    #[error("date {date} is not on the calibration grid (step {step})")]
    OffGrid { date: f64, step: f64 },

    #[error("CDS quote implies non-positive recovery: spread {spread} x period {period} >= 1")]
    SpreadTooWide { spread: f64, period: f64 },

    #[error("missing {0} quotes")]
    MissingQuotes(&'static str),

    #[error("CDS premium leg is degenerate (zero annuity)")]
    DegenerateAnnuity,

    #[error("parameter fit did not converge after {iterations} iterations (residual norm {residual_norm:e})")]
    FitNotConverged {
        iterations: usize,
        residual_norm: f64,
        /// Best parameter vector found, in `FitParams::to_array` order.
        best: [f64; 10],
    },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
