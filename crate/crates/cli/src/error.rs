use ectmol::dataset::DatasetError;
use ectmol::features::FeatureError;
use ectmol::pipeline::PipelineError;
use ectmol::regression::RegressionError;
use ectmol::{EctError, SmilesError};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONTRACT: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// A failure classified by exit code: 2 input/parse, 3 data contract,
/// 64 usage.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Contract(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Contract(_) => EXIT_CONTRACT,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Input(format!("IoFailure: {}: {e}", path.display()))
    }
}

impl From<SmilesError> for CliError {
    fn from(e: SmilesError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } | DatasetError::MissingColumn(_) | DatasetError::MalformedFile(_) => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Contract(e.to_string()),
        }
    }
}

impl From<EctError> for CliError {
    fn from(e: EctError) -> Self {
        match e {
            EctError::InvalidCount | EctError::InvalidDimension | EctError::InvalidGrid(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Contract(e.to_string()),
        }
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        CliError::Contract(e.to_string())
    }
}

impl From<RegressionError> for CliError {
    fn from(e: RegressionError) -> Self {
        match e {
            RegressionError::InvalidFolds(_) | RegressionError::InvalidLambda(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Contract(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Smiles { .. } => CliError::Input(e.to_string()),
            PipelineError::Feature(f) => f.into(),
            PipelineError::Ect(x) => x.into(),
        }
    }
}
