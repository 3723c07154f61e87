use thiserror::Error;

/// Failures of a CLI run, one variant per exit code class.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("outside the solution set: {0}")]
    Outside(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// `0` success, `1` usage or config, `2` outside `J`/`I`, `3` numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Outside(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(m)
            | CliError::Config(m)
            | CliError::Outside(m)
            | CliError::Numerical(m) => m.clone(),
            CliError::Io(e) => e.to_string(),
        }
    }
}

impl From<nsaxi_core::Error> for CliError {
    fn from(e: nsaxi_core::Error) -> Self {
        use nsaxi_core::Error as E;
        match e {
            // Inputs are checked for finiteness before reaching the core, so a
            // remaining domain error means a pole constant below -1.
            E::NotInJ { .. } | E::NotInI { .. } | E::Domain { .. } => {
                CliError::Outside(e.to_string())
            }
            E::Precondition(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
