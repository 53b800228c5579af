//! File formats, parallel sweeps and the `gaitlab` command line on top of
//! `gaitlab-core`.

pub mod cli;
mod error;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod sweep;

pub use error::{Error, Result};
