//! Front end for `gibbs-core`: simulate, fit and validate from the command
//! line, and window-growth consistency experiments.

pub mod commands;
pub mod config;
pub mod experiment;
pub mod plot;

pub use commands::{
    cmd_fit, cmd_simulate, cmd_validate, family_for_kind, validate_samples, window_for, CliError, FitArgs,
    FitMethodArg, SimulateArgs, ValidateArgs, ValidationReport,
};
pub use experiment::{run_consistency, ConsistencyReport, ExperimentSpec};
