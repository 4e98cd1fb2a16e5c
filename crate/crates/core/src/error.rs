use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not symmetric: max |M[i][j] - M[j][i]| = {asymmetry:e}")]
    NotSymmetric { asymmetry: f64 },

    #[error("members {i} and {j} do not commute: ||[A_i, A_j]||_F = {norm:e} > {tol:e}")]
    CommutationViolation { i: usize, j: usize, norm: f64, tol: f64 },

    #[error("joint diagonalization residual {residual:e} exceeds {tol:e}")]
    ConvergenceFailure { residual: f64, tol: f64 },

    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),

    /// Raised when some joint level (or weight difference) vanishes on the
    /// leading direction and has mixed signs on the trailing ones: then
    /// `sum_k eps_k d_k` changes sign inside every box `(0, delta)^(n-1)`.
    #[error("no uniform threshold exists: {reason}")]
    NoUniformThreshold { reason: String },

    #[error("direction lies outside the subalgebra (distance {distance:e})")]
    BetaOutsideSubalgebra { distance: f64 },

    #[error("basis is linearly dependent or does not span the subalgebra: {0}")]
    DependentBasis(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("no certified direction after {0} draws")]
    ExhaustedRetries(usize),

    #[error("renormalization correction {0:e} exceeds 10%; reduce the step size")]
    StepTooLarge(f64),

    #[error("flow did not settle before t = {t_max}: final field norm {residual:e}")]
    HorizonExceeded { t_max: f64, residual: f64 },

    #[error("point is not fixed: ||beta_X|| = {0:e}")]
    NotAFixedPoint(f64),

    #[error("could not parse model {path}: {message}")]
    ModelParse { path: PathBuf, message: String },

    #[error("unknown campaign '{0}' (expected theorem1, theorem2, lemma-linearization, convexity or numerics)")]
    UnknownCampaign(String),

    #[error("argument error: {0}")]
    Argument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
