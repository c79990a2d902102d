//! ETD metadata ingestion: harvesting, parsing, college assignment, splitting and CSV.

pub mod college;
pub mod csv_io;
pub mod dublin_core;
pub mod oai;
pub mod record;
pub mod split;

use thiserror::Error;

pub use college::{assign_college, assign_colleges, default_roster, Roster, DEFAULT_THRESHOLD};
pub use csv_io::{read_csv, read_csv_file, write_csv, write_csv_file, HEADER};
pub use dublin_core::parse_record;
pub use oai::{harvest, Harvest, HarvestConfig};
pub use record::{College, DegreeLevel, EtdRecord, EtdType};
pub use split::{split, CorpusSplit, DEFAULT_RATIO};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("XML parse error: {0}")]
    Xml(String),
    #[error("record rejected: missing field {0}")]
    MissingField(&'static str),
    #[error("record rejected: invalid {field} value {value:?}")]
    InvalidField { field: &'static str, value: String },
    #[error("record is marked deleted")]
    Deleted,
    #[error("request to {url} failed: {message}")]
    Transport { url: String, message: String },
    #[error("OAI-PMH protocol error: {0}")]
    Protocol(String),
    #[error("CSV schema error: {0}")]
    Schema(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CorpusError {
    /// True for per-record rejections that a harvest should skip rather than abort on.
    pub fn is_rejection(&self) -> bool {
        matches!(
            self,
            CorpusError::Xml(_) | CorpusError::MissingField(_) | CorpusError::InvalidField { .. } | CorpusError::Deleted
        )
    }
}
