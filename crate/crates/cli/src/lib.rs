//! Command-line front end for the `diaggate` library: seeded sampling,
//! moment and entropy tables, contradiagonalization of matrix files, and
//! self-verification suites.
//!
//! Every output file embeds a [`dataset::RunManifest`] recording the
//! subcommand, its parameters and the seed, so rerunning it reproduces the
//! same numbers.

pub mod commands;
pub mod dataset;
pub mod error;
pub mod matrix_io;
pub mod verify;

pub use commands::{execute, Cli};
pub use error::CliError;
