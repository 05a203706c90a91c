//! Command-line driver for `groupci-core`: CSV ingestion, interval and
//! theory tables, seeded simulations and numerical verification grids.

pub mod commands;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod fixture;
pub mod grid;
pub mod output;

pub use error::{exit, CliError, DataError, Result};
