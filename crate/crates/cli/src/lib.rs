//! Command implementations behind the `consensus` binary.
//!
//! Every command returns an [`Outcome`] holding the JSON document to print and
//! whether the run counts as a success; `main` only handles argument parsing,
//! printing and exit codes.

pub mod analyze;
pub mod simulate;
pub mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use consensus_core::{parse_edge_list, Digraph, EdgeListError};
use serde::Serialize;
use thiserror::Error;

pub use analyze::{analyze, AnalysisReport, AnalyzeOptions};
pub use simulate::{simulate, InitialState, SimulateOptions, SimulationMode};
pub use verify::{verify, GraphSource, VerifyOptions, VerifyReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error at {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: EdgeListError,
    },
    #[error("{0}")]
    Invalid(#[from] consensus_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("inconsistent report: {0}")]
    Inconsistent(String),
}

impl CliError {
    /// 1 for validation and check failures, 2 for I/O and parse errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Parse { source, .. } => match source {
                EdgeListError::Parse { .. } => 2,
                EdgeListError::Invalid(_) => 1,
            },
            CliError::Invalid(_) | CliError::Usage(_) | CliError::Inconsistent(_) => 1,
        }
    }
}

/// A command's JSON output and whether it passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub json: String,
    pub success: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.success {
            0
        } else {
            1
        }
    }
}

pub fn read_graph(path: &Path) -> Result<Digraph, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_edge_list(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |acc: f64, (x, y)| acc.max((x - y).abs()))
}
