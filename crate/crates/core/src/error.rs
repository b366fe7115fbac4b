use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    Hermiticity { deviation: f64 },

    #[error("operator is not unitary (‖U†U − I‖_F = {deviation:.3e})")]
    Unitarity { deviation: f64 },

    #[error("not a density operator: {0}")]
    InvalidState(String),

    #[error("function undefined on spectrum: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("energy {energy} outside the open spectral interval ({min}, {max})")]
    EnergyRange { energy: f64, min: f64, max: f64 },

    #[error("Fock truncation insufficient: {0}")]
    Truncation(String),

    #[error("trajectory is not unitary: joint entropy changed by {drift:.3e}")]
    NonUnitaryTrajectory { drift: f64 },

    #[error("quantities not comparable: {0}")]
    NonComparable(String),

    #[error("need at least {needed} records, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Errors produced by the numerics (as opposed to bad input files).
    pub fn is_numeric(&self) -> bool {
        !matches!(self, Error::Config(_))
    }
}
