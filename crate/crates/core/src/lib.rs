//! Multiple correspondence analysis workbench for categorical registries.
//!
//! The pipeline runs from a data dictionary and CSV ([`schema`]) through an
//! analysis-ready categorical dataset ([`dataset`]) to a fitted model
//! ([`mca`]), its statistical descriptions ([`inference`]) and the JSON,
//! CSV and SVG reports built from them ([`report`], [`svg`]).

pub mod dataset;
pub mod error;
pub mod inference;
pub mod mca;
pub mod pipeline;
pub mod report;
pub mod schema;
pub mod special;
pub mod svg;

pub use error::{Error, ErrorClass, Result};
