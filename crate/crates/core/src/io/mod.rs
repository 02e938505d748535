//! File formats: frames files, trajectory records, run configuration and result tables.

mod config;
mod frames;
mod tables;
mod trajectory;

pub use config::{
    BirthKernelConfig, CustomModel, EstimationConfig, ExperimentConfig, ModelConfig, OutputConfig,
    RateConfig, RunConfig, SimulationConfig, WindowConfig, EXAMPLE_CONFIG,
};
pub use frames::{read_frames, read_frames_from, write_frames, write_frames_to, FramesOptions};
pub use tables::{
    cv_rows, estimate_rows, mse_rows, read_table, scheme_label, write_json, write_mse_summary,
    write_table, write_table_to, CcfRow, CvRow, EstimateRow, ExperimentSummary, Meta, MseRow,
};
pub use trajectory::{
    read_trajectory, read_trajectory_from, read_trajectory_with_meta, write_trajectory,
    write_trajectory_to, write_trajectory_with_meta, Record, TRAJECTORY_FORMAT, TRAJECTORY_VERSION,
};
