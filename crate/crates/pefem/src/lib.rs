//! File formats, reports and the `pefem` command line on top of [`pefem_core`].
//!
//! The binary exposes four subcommands (`mesh`, `solve`, `convergence`,
//! `lemma-check`) driven by a [`config::RunConfig`]. Every report embeds the
//! configuration, its hash and the crate version; wall-clock measurements are
//! confined to `timing` objects so that repeated runs can be compared byte for
//! byte once those are removed.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod meshio;
pub mod mtx;
pub mod report;
pub mod vtk;

pub use error::{CliError, ExitCode};
pub use pefem_core as core;

/// Version string recorded in every report.
pub const VERSION: &str = concat!("pefem ", env!("CARGO_PKG_VERSION"));
