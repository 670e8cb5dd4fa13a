//! Experiment configuration, presets, seeded multi-trial runs, tracking
//! metrics and file output.

pub mod analyze;
pub mod config;
pub mod metrics;
pub mod output;
pub mod presets;
pub mod runner;

pub use analyze::{analyze, format_report, format_sweep_csv, sweep, NamedReport, Sweep, SweepRow};
pub use config::{
    ArenaSpec, BoundarySpec, ControlMode, ControlSpec, EstimationMode, EstimationSpec, ExperimentConfig, Fidelity,
    GainsSpec, InitialSpec, ModelSpec, OutputFormat, OutputSpec, ReferenceSpec, Resolved, SsaSpec,
};
pub use metrics::{aggregate, tracking_error, Aggregate};
pub use output::{read_trajectory_csv, write_outputs};
pub use presets::{preset, preset_names, preset_source, PRESETS};
pub use runner::{
    default_workers, reference_trajectory, run_experiment, trajectory_meta, RunReport, TrialDetail, TrialResult,
    DEFAULT_MAX_HOLD,
};
