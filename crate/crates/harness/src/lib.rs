//! Configuration, dataset persistence and experiment pipelines behind the
//! `platelab` command line tool.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod output;
pub mod verify;

pub use commands::{run_recon, run_sweep, run_synth, run_timesim};
pub use config::ExperimentConfig;
pub use dataset::{read_dataset, write_dataset, DatasetManifest, StoredDataset};
pub use error::{HarnessError, Result};
pub use verify::{run_verify, VerifyReport};
