use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Hilbert space: n_max = {n_max}, at least 2 is required")]
    InvalidHilbertSpace { n_max: usize },

    #[error("incompatible spaces: expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("Hamiltonian is not Hermitian (max |H - H†| = {error:e})")]
    NotHermitian { error: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("steady state is not unique (augmented Liouvillian is singular, pivot ratio {pivot_ratio:e})")]
    NonUniqueSteadyState { pivot_ratio: f64 },

    #[error("steady-state residual {residual:e} exceeds tolerance {tolerance:e}")]
    SteadyStateResidual { residual: f64, tolerance: f64 },

    #[error("integration step size underflow at t = {t} (step {step:e})")]
    StepSizeUnderflow { t: f64, step: f64 },

    #[error("invalid time grid: {0}")]
    InvalidTimes(String),

    #[error("correlation undefined: vacuum-dominated state with <m†m> = {occupation:e}")]
    VacuumDominated { occupation: f64 },

    #[error("analytic singularity: |{quantity}| = {magnitude:e} below floor")]
    AnalyticSingularity {
        quantity: &'static str,
        magnitude: f64,
    },

    #[error("invalid scan grid: {0}")]
    InvalidGrid(String),
}
