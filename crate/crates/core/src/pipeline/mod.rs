//! Command layer: configuration, output bundles, plots and subcommands.

pub mod bundle;
pub mod commands;
pub mod config;
pub mod plot;

pub use bundle::{read_manifest, Bundle, Manifest, MANIFEST};
pub use commands::{
    analysis_files, cmd_analyze, cmd_describe, cmd_export_graph, cmd_simulate, cmd_validate,
    write_inputs, Outcome, EXIT_ESTIMATION, EXIT_IO, EXIT_OK, EXIT_VALIDATION,
};
pub use config::{
    DiagnosticSelection, Format, Member, Overrides, ReportOptions, RunConfig, SimulationConfig,
};
