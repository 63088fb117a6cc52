//! Experiment configs, binary field dumps, CSV tables and run manifests.

mod config;
mod dump;
mod manifest;
mod table;

pub use config::{
    ExperimentConfig, GeneralSection, GridSection, HartreeTermSource, KernelSource, ModelSection,
    OutputsSection,
};
pub use dump::{FieldDump, HEADER_LEN, MAGIC, VERSION};
pub use manifest::Manifest;
pub use table::Table;
