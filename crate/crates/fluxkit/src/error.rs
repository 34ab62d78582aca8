use thiserror::Error;

/// Errors produced by the toolkit.
///
/// The CLI maps these onto exit codes: design/working-point/grid problems
/// are configuration errors (exit 2), solver breakdowns are numerical
/// errors (exit 3), and an infeasible optimization target exits 4.
#[derive(Debug, Error)]
pub enum FluxError {
    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("wrong working point: operation requires phi_e = pi, got {phie_rad} rad")]
    WrongWorkingPoint { phie_rad: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("basis too small: requested {requested} eigenpairs from a dimension-{dimension} operator")]
    BasisTooSmall { requested: usize, dimension: usize },

    #[error("numerical failure in {stage}: worst residual {worst_residual:.3e}")]
    NumericalFailure { stage: &'static str, worst_residual: f64 },

    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    #[error(
        "basis dimension {dimension} exceeds budget {budget}; \
         use the 1D model for this array size or raise FLUXKIT_MAX_DIM"
    )]
    BudgetExceeded { dimension: usize, budget: usize },

    #[error("no feasible design: {0}")]
    Infeasible(String),

    #[error("sweep failed: every row errored; first error: {0}")]
    SweepFailed(String),
}

pub type Result<T> = std::result::Result<T, FluxError>;
