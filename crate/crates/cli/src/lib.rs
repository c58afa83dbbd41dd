//! `tfdlab`: fidelity, entanglement and characteristic-time curves for
//! thermofield-double dynamics of chaotic spectra under energy dephasing.
//!
//! The binary dispatches three subcommands over a JSON config:
//! `syk` (dephased SYK observable curves and times), `gue` (Monte Carlo
//! form factor against the analytic finite-d and asymptotic forms), and
//! `times` (characteristic times swept over N).

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod svg;

pub use commands::{run_gue, run_syk, run_times};
pub use config::{load_config, Overrides, RunConfig};
pub use error::CliError;
