//! File formats: session CSV, treatment tables, JSON reports and SVG
//! renderings of lattice distributions.

mod config;
mod csv;
mod report;
mod svg;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{parse_treatment_config, read_treatment_config, write_treatment_config};
pub use csv::{
    parse_session_csv, read_session_csv, session_csv_string, session_digest, write_session_csv,
};
pub use report::{to_json_string, write_json, AnalysisReport, SessionIdentity, TOOL_VERSION};
pub use svg::{lattice_svg, render_lattice_svg, RESIDUAL_MAGNIFICATION};

#[derive(Debug, Error)]
pub enum SessionIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema: {0}")]
    Schema(String),
    #[error("line {line}: count {value} outside 0..={n}")]
    Range { line: usize, value: u64, n: u32 },
    #[error("line {line}: duplicate treatment id {id}")]
    DuplicateId { line: usize, id: u32 },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl SessionIoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SessionIoError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        SessionIoError::Parse {
            line,
            message: message.into(),
        }
    }
}
