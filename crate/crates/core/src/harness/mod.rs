//! Experiment runner: configuration parsing, solver dispatch, measure
//! evaluation along trajectories, parallel parameter sweeps, CSV output and
//! the paper-figure presets used as regression fixtures.

mod config;
mod csv;
mod presets;
mod runner;
mod sweep;
mod validate;

pub use config::{
    parse_config, ExperimentConfig, InitialState, MeasureSpec, Pair, ParsedConfig,
    SolverKind, SolverParams, SweepSpec, SweepValue,
};
pub use csv::{csv_string, write_csv};
pub use presets::{figure_preset, preset_names};
pub use runner::{run_experiment, TimeSeries};
pub use sweep::{run_sweep, SweepPoint};
pub use validate::{run_validation, CheckResult};
