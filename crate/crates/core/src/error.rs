use thiserror::Error;

/// Errors raised by the numerical and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the admissible region.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative routine stopped before reaching its tolerance.
    #[error("no convergence in {routine}: {detail}")]
    Convergence { routine: &'static str, detail: String },

    /// `1/R` is not integrable at infinity, so `phi` is infinite.
    #[error("1/R is not integrable at infinity: {0}")]
    NotIntegrable(String),

    /// Laplace inversion failed its forward residual check.
    #[error("scale function inversion failed: residual {residual:.3e} exceeds {limit:.3e}")]
    Inversion { residual: f64, limit: f64 },

    /// `Delta` only exists when `W` has a finite limit (`gamma > 0`).
    #[error("Delta is undefined when gamma <= 0")]
    DeltaUndefined,

    /// A tail-slope test could not separate convergence from divergence.
    #[error("tail slope {slope:.4} is within tolerance of -1")]
    InconclusiveTail { slope: f64 },

    /// Infinity is not an entrance boundary for this configuration.
    #[error("infinity is not an entrance boundary: {0}")]
    NotEntrance(String),

    /// An integral that should be finite was detected to diverge.
    #[error("divergent integral: {0}")]
    Divergent(String),

    /// `W_1(b)` is infinite so the hitting-time series is not summable.
    #[error("W_1(b) is not finite: {0}")]
    Summability(String),

    /// The series `sum lambda^n W_n(b)` does not converge at the requested `lambda`.
    #[error("series diverges at lambda = {lambda:.6e} (radius estimate {radius_hint:.6e})")]
    SeriesDiverges { lambda: f64, radius_hint: f64 },

    /// Cancellation produced a negative variance beyond tolerance.
    #[error("negative variance {0:.6e}")]
    NegativeVariance(f64),

    /// An argument is outside the range where the routine is valid.
    #[error("argument out of range: {0}")]
    OutOfRange(String),

    /// Inconsistent simulation settings.
    #[error("configuration error: {0}")]
    Config(String),

    /// None of the asymptotic regimes apply.
    #[error("no asymptotic regime applies: {0}")]
    NoRegime(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
