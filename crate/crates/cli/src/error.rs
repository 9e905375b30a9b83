use std::fmt;

use qjf_core::doob::DoobError;
use qjf_core::grid::GridError;
use qjf_core::model_file::ModelFileError;
use qjf_core::models::ModelsError;
use qjf_core::spectral::SpectralError;
use qjf_core::trajectories::SamplerError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const SOLVER: i32 = 3;
    pub const SYMMETRY: i32 = 4;
    pub const SAMPLER: i32 = 5;
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: exit::INPUT,
            message: message.into(),
        }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        Self {
            code: exit::SOLVER,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ModelFileError> for CliError {
    fn from(e: ModelFileError) -> Self {
        Self::input(format!("model: {e}"))
    }
}

impl From<ModelsError> for CliError {
    fn from(e: ModelsError) -> Self {
        Self::input(format!("example: {e}"))
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Model(m) => Self::input(m.to_string()),
            other => Self::solver(format!("spectral solve failed: {other}")),
        }
    }
}

impl From<DoobError> for CliError {
    fn from(e: DoobError) -> Self {
        match e {
            DoobError::SymmetryPrecondition(r) => Self {
                code: exit::SYMMETRY,
                message: format!(
                    "symmetry precondition fails: Hamiltonian residual {:e}, jump residual {:e}",
                    r.hamiltonian_residual, r.jump_residual
                ),
            },
            DoobError::SymmetryInvalid(s) => Self::input(format!("symmetry: {s}")),
            DoobError::Model(m) => Self::input(m.to_string()),
            DoobError::BiasLength { .. } | DoobError::BadU { .. } | DoobError::GridPairing(_) => {
                Self::input(e.to_string())
            }
            other => Self::solver(format!("Doob transform failed: {other}")),
        }
    }
}

impl From<SamplerError> for CliError {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::Spectral(s) => s.into(),
            SamplerError::Doob(d) => d.into(),
            SamplerError::Model(m) => Self::input(m.to_string()),
            SamplerError::StateDimension { .. } | SamplerError::NotNormalized(_) => Self::input(e.to_string()),
            other => Self {
                code: exit::SAMPLER,
                message: format!("sampler failed: {other}"),
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(format!("i/o: {e}"))
    }
}
