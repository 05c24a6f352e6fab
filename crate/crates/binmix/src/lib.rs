//! Configuration, persistence, rendering and the command-line driver for
//! `binmix-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod render;
pub mod run;
pub mod series;
pub mod snapshot;
pub mod study;

pub use config::{load_config, RunConfig};
pub use error::{Error, Result};
pub use run::{run_simulation, RunSummary};
