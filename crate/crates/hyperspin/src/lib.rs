//! Command-line front end for `hyperspin-core`: run configuration, CSV and
//! JSON file formats, the heterodyne FID signal chain and the `hyperspin`
//! binary's subcommands.
//!
//! `HYPERSPIN_THREADS` caps the number of worker threads.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod fid;
pub mod format;
pub mod output;
pub mod threads;

pub use error::{AppError, Result};
