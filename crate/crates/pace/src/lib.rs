//! File formats, experiment configs and the experiment runner built on `pace-core`.

pub mod config;
pub mod error;
pub mod experiment;
pub mod io;

pub use error::{Error, Result};
