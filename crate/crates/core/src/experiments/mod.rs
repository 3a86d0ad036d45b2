//! Reproducible experiments: seeded case generation, the five commands and their reports.

mod config;
mod duality;
pub mod generate;
mod halving;
mod hopf;
mod report;
mod symmetrize;
mod theorem;

pub use config::{parse_bounds, parse_number, Command, ConfigError, ExperimentConfig};
pub use duality::cmd_duality;
pub use halving::{cmd_halving, halving_tolerance, swap};
pub use hopf::{
    cmd_hopf, hopf_settings, ladder, ring_calibration, ring_solve, run_ladder, CalibrationRow, Ladder, LadderSpec, Rung,
    FLUX_TOLERANCE, HOPF_REFERENCE, HOPF_VERTICES, RING,
};
pub use report::{Check, Record, Report};
pub use symmetrize::{cmd_symmetrize, cmd_symmetrize_with, normalize_about_axis, SymmetrizeOptions, CHAIN_NOISE};
pub use theorem::{cmd_theorem, perturb};

/// Runs `cfg.command`.
pub fn run(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    match cfg.command {
        Command::Hopf => cmd_hopf(cfg),
        Command::Halving => cmd_halving(cfg),
        Command::Symmetrize => cmd_symmetrize(cfg),
        Command::Theorem => cmd_theorem(cfg),
        Command::Duality => cmd_duality(cfg),
    }
}
