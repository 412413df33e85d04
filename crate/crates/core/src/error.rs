use thiserror::Error;

/// Crate-wide error type.
///
/// Variants split into configuration/validation problems (bad inputs,
/// mismatched grids or bases) and numerical failures (non-convergence,
/// missing features in a series). The CLI maps the former to exit code 2
/// and the latter to exit code 3.
#[derive(Debug, Error)]
pub enum SwionError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("grid size {0} is not a power of two >= 8")]
    NotPowerOfTwo(usize),

    #[error(
        "momentum cutoff too small: p_max = {p_max:.3} but the dynamics \
         needs at least {required:.3} (grow n_points or shrink the extent)"
    )]
    MomentumCutoff { p_max: f64, required: f64 },

    #[error("basis mismatch: expected {expected}, got {got}")]
    BasisMismatch { expected: String, got: String },

    #[error("grid mismatch between states")]
    GridMismatch,

    #[error("initial state support violation: {0}")]
    SupportViolation(String),

    #[error("mixing angle undefined: delta = 0 and cos(kx+phi) = 0 at x = {0}")]
    UndefinedAngle(f64),

    #[error("dense oracle limited to 2*n_points <= {limit}, got {got}")]
    SizeGuard { limit: usize, got: usize },

    #[error(
        "Chebyshev expansion did not converge within {max_order} terms \
         (scaled step alpha = {alpha:.1}); spectral bounds are likely wrong"
    )]
    NonConvergence { max_order: usize, alpha: f64 },

    #[error("spectrum window too small: {0}")]
    WindowTooSmall(String),

    #[error("spectrum does not cover n0 = {n0} +/- {half_width}")]
    InsufficientSpectrum { n0: usize, half_width: usize },

    #[error("no autocorrelation peak found (prominence {prominence})")]
    NoPeakFound { prominence: f64 },

    #[error("no observable record within one sampling interval of t = {0}")]
    MissingRecord(f64),

    #[error("no rational approximant k*w2 = l*w1 within tolerance (denominators <= {0})")]
    NoRationalApproximant(u64),

    #[error("Hermite recurrence unstable for n = {0} on this grid")]
    HermiteUnstable(usize),

    #[error("scan budget exhausted: {points} points requested, budget {budget}")]
    BudgetExhausted { points: usize, budget: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("linear algebra error: {0}")]
    Linalg(String),
}

impl SwionError {
    /// True for errors caused by bad configuration or inconsistent inputs
    /// (CLI exit code 2); false for numerical failures (exit code 3).
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            SwionError::InvalidParams(_)
                | SwionError::NotPowerOfTwo(_)
                | SwionError::MomentumCutoff { .. }
                | SwionError::BasisMismatch { .. }
                | SwionError::GridMismatch
                | SwionError::SupportViolation(_)
                | SwionError::SizeGuard { .. }
                | SwionError::Config(_)
                | SwionError::BudgetExhausted { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, SwionError>;
