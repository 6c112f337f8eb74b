//! Dataset ingestion, the original-trajectory store, synthetic data and the
//! recognition-rate experiment.

mod experiment;
mod io;
mod store;
mod synth;

pub use experiment::{
    derive_seed, recognition_rate, run_experiment, AttackResult, ExperimentConfig,
    ExperimentReport,
};
pub use io::{format_coord, load_csv, load_porto, write_csv, PortoLoad, PORTO_SAMPLE_INTERVAL_S};
pub use store::TrajectoryStore;
pub use synth::{synth_trajectories, synth_with, SynthConfig};
