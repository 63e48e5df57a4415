//! Experiment driver: configuration files, seed sweeps, CSV outputs and the
//! invariant suite behind the command line.

pub mod config_file;
pub mod output;
pub mod sweep;
pub mod validate;

pub use config_file::{parse_config, parse_kind, ConfigFile};
pub use sweep::{
    aggregate, emit_timeseries, run_cells, run_sweep, run_sweep_detailed, SweepCell, SweepRow,
    SweepSpec,
};
