//! Command-line front end: JSON circuit files in, JSON reports out.

pub mod build;
pub mod commands;
pub mod schema;

use std::path::Path;

pub use build::{build_circuit, build_op};
pub use commands::{run, Cli, Command, Method};
pub use schema::{CircuitFile, OpSpec, StateSpec, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or malformed input; exit code 2.
    #[error("schema error: {0}")]
    Schema(String),
    /// Valid input the core library rejected; exit code 3.
    #[error("construction error: {0}")]
    Construction(#[from] pathsim::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Construction(_) => 3,
        }
    }
}

/// Strict parse, including the version check.
pub fn parse_circuit(text: &str) -> Result<CircuitFile, CliError> {
    let file: CircuitFile = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
    build::check_version(&file)?;
    Ok(file)
}

pub fn load_circuit(path: &Path) -> Result<CircuitFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
    parse_circuit(&text).map_err(|e| match e {
        CliError::Schema(msg) => CliError::Schema(format!("{}: {msg}", path.display())),
        other => other,
    })
}
