use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The adaptive controller could not meet the tolerance above the minimum
    /// step size, or the state stopped being finite.
    #[error("integration failed at t = {t}: step {step:e} ({reason})")]
    StepFailure { t: f64, step: f64, reason: String },

    #[error("state left the unit ball at t = {t}: |m| = {norm}")]
    NormBound { t: f64, norm: f64 },

    #[error("analysis window too short: need {needed} samples, have {available}")]
    WindowTooShort { needed: usize, available: usize },

    #[error("spectrum has no dominant line (peak/median = {contrast:.3})")]
    NoDominantLine { contrast: f64 },

    #[error("interaction phase has sin(theta) = 0; the interaction is a pure rotation")]
    DegeneratePhase,

    #[error("{sites} sites exceed the exact-simulation limit of {max}")]
    DimensionTooLarge { sites: usize, max: usize },

    #[error("density matrix lost positivity at t = {t}: min eigenvalue {min_eigenvalue:e}")]
    PositivityBreach { t: f64, min_eigenvalue: f64 },
}

impl Error {
    /// Short stable identifier, used as the error-code column of sweep output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid_params",
            Error::InvalidInput(_) => "invalid_input",
            Error::StepFailure { .. } => "step_failure",
            Error::NormBound { .. } => "norm_bound",
            Error::WindowTooShort { .. } => "window_too_short",
            Error::NoDominantLine { .. } => "no_dominant_line",
            Error::DegeneratePhase => "degenerate_phase",
            Error::DimensionTooLarge { .. } => "dimension_too_large",
            Error::PositivityBreach { .. } => "positivity_breach",
        }
    }
}
