use thiserror::Error;

/// Everything that can go wrong when building models or running solvers.
#[derive(Debug, Error)]
pub enum QtmError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max elementwise deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix exponential rejected: 1-norm {0:.3e} too large to evaluate reliably")]
    NormOverflow(f64),

    #[error("steady-state solve failed: {0}")]
    SolverFailure(String),

    #[error("steady state is not unique: {0}")]
    DegenerateSteadyState(String),

    #[error("state invariant violated during evolution: {0}")]
    EvolutionDiverged(String),

    #[error("clock simulation hit the event budget after {completed} ticks (walk may be unbiased or downhill)")]
    ClockStalled { completed: usize },
}

pub type Result<T> = std::result::Result<T, QtmError>;
