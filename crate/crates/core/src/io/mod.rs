//! Datasets, CIF ingestion, checkpoints and run configuration.

pub mod checkpoint;
pub mod cif;
pub mod config;
pub mod jsonl;

pub use checkpoint::{load_model, VERSION as CHECKPOINT_VERSION};
pub use cif::{parse_cif_p1, read_cif_p1};
pub use config::{RunConfig, SamplerConfig, SEED_ENV};
pub use jsonl::{read_jsonl, read_structures, write_jsonl, write_structures, DatasetRecord};
