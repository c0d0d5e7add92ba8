//! Files written by the harness.
//!
//! Column orders of every CSV are fixed by the row structs below.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ExperimentConfig, Mode};
use crate::HarnessError;

pub const MANIFEST: &str = "manifest.json";
pub const TRAIN_LOG: &str = "train_log.csv";
pub const EVAL_HISTORY: &str = "eval_history.csv";
pub const FINAL_CHECKPOINT: &str = "final.ckpt";
pub const BEST_CHECKPOINT: &str = "best.ckpt";
pub const EVAL_SUMMARY: &str = "eval_summary.json";
pub const TRAJECTORY: &str = "trajectory.csv";
pub const TRACE: &str = "trace.jsonl";
pub const SWEEP_TABLE: &str = "sweep.csv";
pub const ORACLE_REPORT: &str = "oracle.json";
pub const ORACLE_TABLE: &str = "oracle.csv";

/// Everything needed to repeat a run.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub mode: Mode,
    pub seed: u64,
    pub version: &'static str,
    pub config: &'a ExperimentConfig,
}

impl<'a> Manifest<'a> {
    pub fn new(command: &'a str, mode: Mode, seed: u64, config: &'a ExperimentConfig) -> Self {
        Self {
            command,
            mode,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            config,
        }
    }
}

/// One row of the trajectory CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub episode: usize,
    pub t: usize,
    pub uav: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub fn create_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(value).expect("artifact is serialisable");
    fs::write(path, text + "\n").map_err(|source| HarnessError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// CSV file with a header derived from the row type.
pub struct CsvSink {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl CsvSink {
    pub fn create(path: &Path) -> Result<Self, HarnessError> {
        let writer = csv::Writer::from_path(path).map_err(|source| HarnessError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self {
            path: path.to_path_buf(),
            writer,
        })
    }

    pub fn row<T: Serialize>(&mut self, row: &T) -> Result<(), HarnessError> {
        self.writer.serialize(row).map_err(|source| HarnessError::Csv {
            path: self.path.clone(),
            source,
        })
    }

    pub fn finish(mut self) -> Result<(), HarnessError> {
        self.writer.flush().map_err(|source| HarnessError::Write {
            path: self.path.clone(),
            source,
        })
    }
}

/// Newline-delimited JSON records.
pub struct JsonLines {
    path: PathBuf,
    out: std::io::BufWriter<fs::File>,
}

impl JsonLines {
    pub fn create(path: &Path) -> Result<Self, HarnessError> {
        let file = fs::File::create(path).map_err(|source| HarnessError::Write {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self {
            path: path.to_path_buf(),
            out: std::io::BufWriter::new(file),
        })
    }

    pub fn record<T: Serialize>(&mut self, value: &T) -> Result<(), HarnessError> {
        let line = serde_json::to_string(value).expect("record is serialisable");
        writeln!(self.out, "{line}").map_err(|source| HarnessError::Write {
            path: self.path.clone(),
            source,
        })
    }

    pub fn finish(mut self) -> Result<(), HarnessError> {
        self.out.flush().map_err(|source| HarnessError::Write {
            path: self.path.clone(),
            source,
        })
    }
}
