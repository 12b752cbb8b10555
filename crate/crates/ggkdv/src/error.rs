//! Error type shared by every module of the crate.

use thiserror::Error;

/// Convenience alias for results produced by this crate.
pub type Result<T> = std::result::Result<T, GgError>;

/// Failures reported by validation, solvers and control synthesis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GgError {
    /// One or more coefficient inequalities (`b, c, r > 0`, `1 − a²b > 0`) fail.
    #[error("coefficient violation: {}", violations.join("; "))]
    CoefficientViolation {
        /// Human-readable description of each failed inequality.
        violations: Vec<String>,
    },
    /// The diagonalising transform is unavailable because `a = 0`.
    #[error("degenerate diagonalization: a = 0 makes the change of variables singular")]
    DegenerateDiagonalization,
    /// Grid parameters are outside their admissible range.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    /// Vector lengths disagree with the grid or with each other.
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch {
        /// Expected length.
        expected: usize,
        /// Length actually supplied.
        found: usize,
    },
    /// A linear system could not be factorised.
    #[error("singular system: zero pivot in column {column}")]
    SingularSystem {
        /// Column of the vanishing pivot.
        column: usize,
    },
    /// The per-step fixed-point iteration for the nonlinear terms failed.
    #[error("Picard divergence at step {step}: increment {residual:.3e} after {iterations} iterations")]
    PicardDivergence {
        /// Time step index at which the iteration failed.
        step: usize,
        /// Last increment norm.
        residual: f64,
        /// Inner iterations performed.
        iterations: usize,
    },
    /// Conjugate gradient did not reach its tolerance.
    #[error(
        "CG stagnation after {iterations} iterations: relative residual {relative_residual:.3e}, \
         Gramian min-eigenvalue estimate {min_eig_estimate:.3e}"
    )]
    CgStagnation {
        /// Iterations performed.
        iterations: usize,
        /// Final relative residual.
        relative_residual: f64,
        /// Smallest Ritz value recovered from the CG coefficients.
        min_eig_estimate: f64,
    },
    /// The nonlinear outer control loop stopped contracting.
    #[error("outer divergence at iteration {iteration}: final error {error:.3e}")]
    OuterDivergence {
        /// Outer iteration index.
        iteration: usize,
        /// Relative final-state error at that iteration.
        error: f64,
    },
    /// Companion-matrix eigenvalues failed the residual check.
    #[error("root conditioning: polynomial residual {residual:.3e} above threshold")]
    RootConditioning {
        /// Largest relative residual `|P(ξ)|` over the computed roots.
        residual: f64,
    },
    /// A control problem precondition (critical length, certificate) fails.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// An argument is outside the documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl GgError {
    /// Stable variant name, used by the command-line front end in messages.
    pub fn name(&self) -> &'static str {
        match self {
            GgError::CoefficientViolation { .. } => "CoefficientViolation",
            GgError::DegenerateDiagonalization => "DegenerateDiagonalization",
            GgError::InvalidGrid(_) => "InvalidGrid",
            GgError::ShapeMismatch { .. } => "ShapeMismatch",
            GgError::SingularSystem { .. } => "SingularSystem",
            GgError::PicardDivergence { .. } => "PicardDivergence",
            GgError::CgStagnation { .. } => "CgStagnation",
            GgError::OuterDivergence { .. } => "OuterDivergence",
            GgError::RootConditioning { .. } => "RootConditioning",
            GgError::Precondition(_) => "Precondition",
            GgError::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
