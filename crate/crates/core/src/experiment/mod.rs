//! Experiment orchestration: config parsing, parameter sweeps with
//! independent per-run random streams, coevolution runs, and file output.

mod config;
mod output;
mod render;
mod sweep;

pub use config::{parse_config, SweepSpec, TopologySpec};
pub use output::{
    format_float, write_critical_csv, write_histogram_csv, write_results_csv, write_results_to, write_snapshot,
    write_timeseries_csv,
};
pub use render::{render_ppm, render_snapshot};
pub use sweep::{
    estimate_rc, network_seed, run_coevolution_experiment, run_seed, run_sweep, run_sweep_observed, CoevolutionRun,
    CriticalPoint, PointSummary, RcEstimate, RunRecord, SnapshotRecord, SweepResult, EXTINCTION_THRESHOLD,
};
