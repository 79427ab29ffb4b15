//! CLI failure taxonomy mapped onto the exit-code contract.

/// A command either failed before any physics ran (bad flags, malformed
/// config, invalid parameter combination → exit 2) or during the numerical
/// work itself (diagnostics out of tolerance, fit without signal, I/O → exit
/// 3). Success is exit 0; `clap` already exits 2 on its own usage errors, so
/// the two configuration paths agree.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn config(msg: impl std::fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }

    pub fn numeric(msg: impl std::fmt::Display) -> Self {
        CliError::Numeric(msg.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config error",
            CliError::Numeric(_) => "numeric failure",
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numeric(format!("i/o failure: {e}"))
    }
}
