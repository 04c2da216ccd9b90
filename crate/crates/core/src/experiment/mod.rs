//! Batch experiments over every module, with deterministic CSV, JSON and
//! SVG reports and a manifest of asserted invariants.

mod config;
mod emit;
mod runner;

pub use config::{ExperimentConfig, ExperimentKind};
pub use emit::{cell, log_log_svg, write_table, Check, Emitter, Series, CODE_VERSION};
pub use runner::{run_experiment, width_sweep, RunOutcome};
