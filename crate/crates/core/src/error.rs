use thiserror::Error;

/// Errors produced by the model, fiber, coefficient and verification layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unknown preset `{0}` (expected anderson, dipole, quartic or alloy)")]
    UnknownPreset(String),

    #[error("Hermitian eigensolver did not converge on a {dim}x{dim} matrix")]
    Eigensolver { dim: usize },

    #[error(
        "iterative eigensolver did not converge: residual {residual:e} after {restarts} restarts"
    )]
    IterativeSolver { residual: f64, restarts: usize },

    #[error("eigenpair residual {residual:e} exceeds certification bound {bound:e}")]
    Uncertified { residual: f64, bound: f64 },

    #[error("Brillouin-zone scan did not converge: minimum still moved by {change:e} (tolerance {tol:e})")]
    ScanNotConverged { change: f64, tol: f64 },

    #[error("theta {theta:?} is not a fiber minimizer: lowest eigenvalue {lambda_min:e}")]
    NotAMinimizer { theta: Vec<f64>, lambda_min: f64 },

    #[error("operation requires the {expected} disorder regime")]
    WrongRegime { expected: &'static str },

    #[error("spectral gap {gap:e} is too small to invert the fiber on the excited subspace")]
    GapTooSmall { gap: f64 },

    #[error(
        "alternating maximization did not converge after {iters} iterations (best value {best})"
    )]
    VariationalNotConverged { iters: usize, best: f64 },

    #[error("concavity guard violated: lambda_min at q = {q} is {interior}, below the endpoint minimum {endpoint}")]
    ConcavityGuard {
        q: f64,
        interior: f64,
        endpoint: f64,
    },

    #[error("exponent fit needs at least 3 usable points, got {usable}")]
    TooFewPoints { usable: usize },

    #[error("truncation too coarse: n = {n} leaves a boundary error {error:e} above {budget:e}; use n >= {required}")]
    TruncationTooCoarse {
        n: usize,
        error: f64,
        budget: f64,
        required: usize,
    },

    #[error("not applicable: {0}")]
    Inapplicable(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
