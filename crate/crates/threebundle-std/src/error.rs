//! Command errors and their exit codes.

use serde_json::json;
use threebundle_core::{AnalysisError, EnsembleError, ExactError, FormulaError, GeometryError, SamplerError};

use crate::config::ConfigError;
use crate::output::OutputError;
use crate::textfmt::FormatError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 2 invalid config, 3 verification failure, 4 budget exceeded, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Failed(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "invalid_config",
            CliError::Verification(_) => "verification_failed",
            CliError::Budget(_) => "budget_exceeded",
            CliError::Failed(_) => "failed",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "exit_code": self.exit_code(), "message": self.to_string() } })
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<OutputError> for CliError {
    fn from(e: OutputError) -> Self {
        match e {
            OutputError::Exists(_) => CliError::Config(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<FormulaError> for CliError {
    fn from(e: FormulaError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<EnsembleError> for CliError {
    fn from(e: EnsembleError) -> Self {
        match e {
            EnsembleError::Geometry(_) | EnsembleError::Infeasible | EnsembleError::InadmissibleBoundary(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<SamplerError> for CliError {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            SamplerError::Ensemble(e) => e.into(),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<ExactError> for CliError {
    fn from(e: ExactError) -> Self {
        match e {
            ExactError::CapExceeded { .. } => CliError::Budget(e.to_string()),
            ExactError::Ensemble(e) => e.into(),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Config(e.to_string())
    }
}
