//! Config-driven experiment runner, CSV and gnuplot output, and the CLI.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod figures;
pub mod output;

pub use cli::cli_main;
pub use config::{
    load_config, parse_config, ExperimentConfig, GridSpec, StateSpec, Sweep, SweepField,
};
pub use experiment::{run_experiment, CaseReport, CaseResult, PairResult, ValidationReport};
pub use figures::FIGURES;
pub use output::{emit_csv, emit_plot_script, render_csv, render_plot_script};
