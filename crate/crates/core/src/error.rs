use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input violated a precondition (sign, range, shape).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A numerical result failed its accuracy check (grid too coarse or too
    /// narrow, quadrature not converged, unitarity lost).
    #[error("precision: {0}")]
    Precision(String),

    /// A statistic has no defined value for the given inputs.
    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),

    /// The solver could not bracket the target.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// The SSMD curve was not monotone over the solver bracket. Carries the
    /// sampled `(signal_strength, ssmd)` pairs.
    #[error("SSMD is not monotone in signal strength over the bracket ({} samples)", samples.len())]
    NonMonotone { samples: Vec<(f64, f64)> },

    /// Truncated number basis lost more norm than allowed.
    #[error("cutoff: {0}")]
    Cutoff(String),

    /// A derived quantity broke an identity it must satisfy.
    #[error("internal consistency: {0}")]
    Internal(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
