//! Shared CLI plumbing: error classification for exit codes, atomic file
//! writes, sorted-key JSON, and the run manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use tabula::clustering::ClusterError;
use tabula::data::DataError;
use tabula::evaluation::EvalError;
use tabula::model::ModelError;
use tabula::pca::PcaError;
use tabula::supervised::SupervisedError;
use tabula::svm::SvmError;

/// CLI failure with its process exit code: 2 usage, 3 data, 4 numeric.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError::Usage(msg.into())
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SupervisedError> for CliError {
    fn from(e: SupervisedError) -> Self {
        match e {
            SupervisedError::RankDeficient => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SvmError> for CliError {
    fn from(e: SvmError) -> Self {
        match e {
            SvmError::NoConvergence { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ClusterError> for CliError {
    fn from(e: ClusterError) -> Self {
        match e {
            ClusterError::SingularCovariance => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<PcaError> for CliError {
    fn from(e: PcaError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::BadSpec { .. } => CliError::Usage(e.to_string()),
            ModelError::Svm(inner) => CliError::from(inner),
            ModelError::Supervised(inner) => CliError::from(inner),
            ModelError::Ensemble(inner) => CliError::from(inner),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<tabula::ensemble::EnsembleError> for CliError {
    fn from(e: tabula::ensemble::EnsembleError) -> Self {
        match e {
            // surface numeric failures of member fits
            tabula::ensemble::EnsembleError::Base(inner) => CliError::from(*inner),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Estimator(inner) => CliError::from(inner),
            EvalError::Data(inner) => CliError::from(inner),
            other => CliError::Data(other.to_string()),
        }
    }
}

/// Serialize with sorted keys (serde_json maps are BTreeMaps, so a round
/// trip through `Value` sorts every object).
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Data(e.to_string()))?;
    serde_json::to_string_pretty(&v).map_err(|e| CliError::Data(e.to_string()))
}

/// Write via a temp file in the same directory, then rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    std::fs::write(&tmp, contents)
        .map_err(|e| CliError::Data(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Record of one command execution; replaying its argv reproduces the
/// output files byte for byte.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// full argument vector, seed resolved
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub wall_time_ms: u64,
    pub version: String,
}

impl RunManifest {
    pub fn path_for(primary_output: &Path) -> PathBuf {
        let mut name = primary_output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        primary_output.with_file_name(name)
    }

    pub fn load(path: &Path) -> Result<RunManifest, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("manifest: {e}")))
    }
}
