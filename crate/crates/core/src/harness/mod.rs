//! Data loading, synthetic instances and the seeded experiment pipeline.

pub mod ais;
pub mod experiment;
pub mod synth;

pub use ais::{load_ais_csv, read_ais, AisLoad, BoundingBox};
pub use experiment::{
    default_satellite, draw_users, gulf_of_mexico, run_experiment, solve_instance, split_seed,
    write_outputs, write_records_csv, write_timings_csv, BackendConfig, BackendKind, Dataset,
    ExperimentConfig, ExperimentOutput, PipelineOutcome, RealizationRecord, SolvedBy, Summary,
    Timing,
};
pub use synth::{synthesize_users, SynthParams};
