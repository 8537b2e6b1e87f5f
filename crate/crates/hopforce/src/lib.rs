//! Files and command-line plumbing around [`hopforce_core`]: edge-list and
//! label ingestion (plain or gzip), word2vec-style embedding files, telemetry
//! CSV, `key=value` config files and JSON run manifests.

pub mod commands;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod settings;

pub use error::{Error, Result};
pub use hopforce_core as core;
