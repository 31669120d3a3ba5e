//! File formats: road corpora, trace tables, run configuration, result
//! tables, and the synthetic corpus generator.

mod config;
mod results;
mod roads;
mod synth;
mod traces;

pub use config::{AlignmentMode, RunConfig, StudySettings};
pub use results::{
    correlation_cells, read_records, write_correlations, write_dm_table, write_json, write_records, write_stats,
    ResultMeta, TOOL_VERSION,
};
pub use roads::{
    load_roads, write_roads, CorpusManifest, LoadedCorpus, RoadChecks, RoadRecord, RoadSource,
    FORMAT_VERSION,
};
pub use synth::{
    arc_control_points, generate_synthetic_corpus, synthetic_traces, ShapeFamily, SynthSpec,
    SyntheticCorpus, CONSTANT_AGENT, CURVATURE_AGENT,
};
pub use traces::{load_traces, write_traces, TRACE_HEADER};

use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}: no valid roads")]
    EmptyCorpus(PathBuf),
    #[error("{path}: schema mismatch: {message}")]
    SchemaMismatch { path: PathBuf, message: String },
    #[error("{path}: row {row}: timestamps of {road_id}/{agent_id} do not increase")]
    NonMonotoneTime {
        path: PathBuf,
        row: usize,
        road_id: String,
        agent_id: String,
    },
    #[error("{path}: checksum mismatch")]
    Checksum { path: PathBuf },
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Lower-case hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, bytes).map_err(io_err(path))
}
