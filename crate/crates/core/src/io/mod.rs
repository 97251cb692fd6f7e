//! Configuration ingestion and result serialization.
//!
//! Config files are single JSON documents with `model`, `sim` and `sweep`
//! sections; unknown keys are rejected. Numeric CSV fields are written with
//! 17 significant digits so every `f64` round-trips exactly.

mod config;
mod csv;
mod manifest;
mod report;

pub use config::{ConfigFile, SweepSection};
pub use csv::{
    estimates_rows, fmt_f64, write_estimates_csv, write_frontier_csv, write_path_csv,
    write_sweep_csv, EstimateRow,
};
pub use manifest::RunManifest;
pub use report::{fmt_sig, AnalysisRecord};

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("config file not found: {}", .0.display())]
    NotFound(PathBuf),
    #[error("cannot read {}: {source}", .path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {}: {source}", .path.display())]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("config {}: {message}", .path.display())]
    Invalid { path: PathBuf, message: String },
    #[error("cannot write {}: {source}", .path.display())]
    Write { path: PathBuf, source: std::io::Error },
}
