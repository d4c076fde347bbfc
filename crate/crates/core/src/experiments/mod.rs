//! Figure sweeps, Monte Carlo generalization experiments and the
//! verification battery that checks every bound against exact oracles.

mod battery;
mod monte_carlo;
mod sweep;

pub use battery::{run_verification_battery, BatteryRanges, BatteryReport, CheckSummary};
pub use monte_carlo::{run_monte_carlo, ExperimentConfig, GenerationCheck, GenerationReport};
pub use sweep::{
    default_epsilon_grid, log_grid, sweep_figure, write_sweep_csv, FigurePreset, SweepCell, SweepConfig, SweepRow,
    SWEEP_CSV_HEADER,
};
