use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Diagnostics attached to a failed iterative fit so callers can inspect the
/// best iterate instead of getting an opaque error.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct NonConvergenceReport {
    /// What was being optimized, e.g. "dirichlet_glm".
    pub context: String,
    pub iterations: usize,
    /// Relative change of the objective over the last accepted step.
    pub last_rel_change: f64,
    /// Final objective value (log-likelihood for ascent problems).
    pub objective: f64,
    /// Best parameters found, flattened row-major with a shape hint.
    pub best_params: Vec<f64>,
    pub shape: (usize, usize),
}

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid arguments, malformed configuration, or inconsistent shapes.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Inputs that are formally well shaped but mathematically degenerate
    /// (all-zero vectors, non-positive parts where positivity is required).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A design matrix was rank deficient; indices are zero-based columns of
    /// the offending design.
    #[error("rank-deficient design, dependent columns {columns:?}")]
    RankDeficient { columns: Vec<usize> },

    /// Fewer instruments than treatment dimensions.
    #[error("under-identified: {q} instruments for {d} treatment dimensions")]
    UnderIdentified { q: usize, d: usize },

    /// A linear solve or factorization failed or was too ill conditioned.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An iterative fit hit its iteration cap before meeting its tolerance.
    /// Carries the best iterate so the caller can still inspect it.
    #[error("{} did not converge after {} iterations (rel change {:.3e})",
            .0.context, .0.iterations, .0.last_rel_change)]
    NonConvergence(Box<NonConvergenceReport>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for errors that indicate a numerical/convergence failure rather
    /// than a caller mistake. The CLI maps these to exit code 3.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. }
                | Error::Numerical(_)
                | Error::NonConvergence(_)
        )
    }
}
