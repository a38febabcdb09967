//! Planted instances, experiment sweeps and their statistics.

mod experiment;
mod planted;
pub mod stats;

pub use experiment::{
    error_flag, read_rows_csv, rows_to_csv, run_experiment, run_trial, summarize, write_rows_csv,
    write_summary_csv, Cell, ClassFamily, ExperimentResult, ExperimentSpec, Summary, TrialRow,
    TrialSettings,
};
pub use planted::{generate_planted, PlantMode, PlantedInstance};
