//! Data dictionaries, CSV registries, validation and synthetic registries.

mod dictionary;
mod synth;
mod table;

pub use dictionary::{ColumnKind, ColumnSpec, DataDictionary, DateFormat};
pub use synth::{generate_synthetic, PlantingMode, SynthBlock, SynthSpec, RNG_ALGORITHM};
pub use table::{
    is_missing, parse_csv, parse_csv_reader, validate, RawTable, ValidationIssue,
    ValidationReport,
};
