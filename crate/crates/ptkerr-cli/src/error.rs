use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("time grids differ: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Engine(#[from] ptkerr::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 2 configuration, 3 oracle truncation, 4 regime, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use ptkerr::Error as E;
        match self {
            CliError::Config(_) | CliError::GridMismatch(_) => 2,
            CliError::Engine(e) => match e {
                E::InvalidParameter(_) | E::Stability(_) => 2,
                E::Truncation { .. } | E::Horizon { .. } | E::TailMass { .. } => 3,
                E::Regime { .. } => 4,
                _ => 1,
            },
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}
