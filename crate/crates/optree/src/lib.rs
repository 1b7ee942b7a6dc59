//! Command-line runner, CSV ingestion and tree export on top of
//! `optree-core`.

pub mod cli;
pub mod config;
pub mod csvio;
mod error;
pub mod export;
pub mod runner;

pub use error::{Error, Result};
