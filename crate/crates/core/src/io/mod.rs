//! File formats: scenario documents, sweep and sample CSVs, run manifests.

mod manifest;
mod scenario;
mod tables;
pub mod units;

use thiserror::Error;

pub use manifest::RunManifest;
pub use scenario::{
    bundled_preset, load_scenario, GridSpec, RangeSpec, ScenarioDocument, PRESET_NAMES,
    SCENARIO_DIR_ENV,
};
pub use tables::{
    read_samples_csv, read_sweep_csv, write_samples_csv, write_sweep_csv, SampleCsvRow,
    SweepCsvRow, SAMPLES_HEADER, SWEEP_HEADER,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Syntax(String),

    /// A scenario or table field failed validation.
    #[error("{field}: {message}")]
    Field { field: String, message: String },

    #[error(transparent)]
    Model(#[from] crate::Error),
}

impl IoError {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        IoError::Field {
            field: field.into(),
            message: message.into(),
        }
    }
}
