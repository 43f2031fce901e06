use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(
        "enumeration of 2^{n} responses exceeds the cap 2^{cap}; use the mixed-integer oracle instead"
    )]
    EnumerationCap { n: usize, cap: usize },

    #[error("operation requires a finite-enumerable feasible set")]
    NotEnumerable,

    #[error("exact inner maximization is not available for this oracle")]
    ExactUnavailable,

    #[error("inconsistent data: the consistent cone meets the admissible set only at 0")]
    InconsistentData,

    #[error("no strict interior: the incenter constraints are infeasible")]
    NoStrictInterior,

    #[error("dimension {p} exceeds the circumcenter limit {max_dim}; the inner problem is NP-hard in general")]
    CircumcenterDimension { p: usize, max_dim: usize },

    #[error("no extreme rays found for the cone")]
    NoExtremeRays,

    #[error("problem is infeasible")]
    Infeasible,

    #[error("problem is unbounded")]
    Unbounded,

    #[error("numerical breakdown in simplex: {message}\npivot log (most recent last):\n{pivot_log}")]
    NumericalBreakdown { message: String, pivot_log: String },

    #[error("quadratic term is not positive semidefinite (pivot {pivot:e} at {index})")]
    NotPsd { index: usize, pivot: f64 },

    #[error("solver hit the iteration limit ({0})")]
    IterationLimit(usize),

    #[error("non-finite iterate at SAMD iteration {iteration}")]
    SamdDiverged {
        iteration: usize,
        trace: Box<crate::samd::SamdTrace>,
    },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the caller's configuration rather than a solver.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Invalid(_)
                | Error::Unsupported(_)
                | Error::DimensionMismatch { .. }
                | Error::Json(_)
                | Error::EnumerationCap { .. }
                | Error::NotEnumerable
                | Error::CircumcenterDimension { .. }
        )
    }
}
