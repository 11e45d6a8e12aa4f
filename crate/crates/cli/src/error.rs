use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] renyi_core::Error),
    #[error("output: {0}")]
    Output(String),
    #[error("{0} acceptance criteria failed")]
    AcceptanceFailed(usize),
}

impl CliError {
    /// 0 success, 1 usage, 2 non-convergence, 3 insufficient statistics, 4 failed acceptance.
    pub fn exit_code(&self) -> i32 {
        use renyi_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Output(_) => 1,
            CliError::Core(E::NonConvergent(_) | E::QuadratureNotConverged { .. }) => 2,
            CliError::Core(E::InsufficientStatistics { .. }) => 3,
            CliError::Core(_) => 1,
            CliError::AcceptanceFailed(_) => 4,
        }
    }
}
