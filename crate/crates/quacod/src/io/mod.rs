//! File formats and benchmark adapters: the plain-text instance format, the
//! per-iteration trace CSV, and the parallel-machine benchmark converter.

mod bench;
mod instance;
mod trace;

pub use bench::{adapt_machine_scheduling, BenchmarkLayout, DEFAULT_BENCH_RECHARGE};
pub use instance::{parse_instance, write_instance, InstanceDocument};
pub use trace::{format_value, parse_trace, write_trace};

use std::io::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("benchmark layout: {0}")]
    Layout(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    File(#[from] std::io::Error),
}

impl IoError {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        Self::Syntax {
            line,
            message: message.into(),
        }
    }
}

/// Write a file atomically: contents land in a sibling temp file which is
/// then renamed over the target.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), IoError> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension()
            .and_then(|e| e.to_str())
            .unwrap_or("out")
    ));
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(contents.as_bytes())?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
