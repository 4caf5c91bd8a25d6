//! Experiment harness: configuration, paired Monte-Carlo sweeps and output.

mod config;
mod experiment;
mod plot;

pub use config::{CodeSection, CsiSection, ExperimentConfig, OutputSection, SweepSection, SystemSection, TurboSection};
pub use experiment::{
    build_code, draw_channel, draw_codeword, parse_csv, run_experiment, run_experiment_with, unit_rng, BerRecord,
    CSV_HEADER, ITERATIONS_CSV_HEADER,
};
pub use plot::{emit_plot_data, parse_plot_data, plot_data};
