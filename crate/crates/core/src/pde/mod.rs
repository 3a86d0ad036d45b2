//! Capacities of condensers in ℝ³ by direct minimization of the discrete p-energy on a
//! voxel grid.

mod density;
mod export;
mod flux;
mod grid;
mod kernel;
mod linear;
mod pipeline;
mod solver;

use thiserror::Error;

pub use grid::{point_segment_distance, rasterize_condenser, rasterize_sets, CondenserSet, GridBox, VoxelGrid, C0, C1, FREE};
pub use density::{density_from_potential, potential_from_density, round_trip, CellDensity, RoundTrip};
pub use export::{export_field, field_header, import_field, slice_csv, FieldHeader};
pub use flux::{flux_spread, level_set_flux, FluxSpread, LevelSetFlux, FLUX_LEVELS};
pub use pipeline::{
    capacity, capacity_in, capacity_with, extrapolate_sqrt, farthest_pole, symmetric_pole, tube_sets, BoxChart,
    CapacityRun, CapacitySettings, ChartChoice, ExtraPlates, Normalization,
};
pub use solver::{solve_capacity, CapacityResult, GradStats, InitialGuess, LevelStats, ScalarField, SolverSettings};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error("box is empty")]
    EmptyBox,
    #[error("grid spacing must be positive, got {0}")]
    BadSpacing(f64),
    #[error("thickening radius {r_thick} is below the grid spacing {h}")]
    ThinTube { r_thick: f64, h: f64 },
    #[error("curve vertex {0} is outside the box or within 5h of its boundary")]
    CurveOutsideBox(usize),
    #[error("plates overlap at node {0}; use a larger box or a smaller thickening radius")]
    MaskOverlap(usize),
    #[error("plate {0} is empty on this grid")]
    EmptyMask(&'static str),
    #[error("plate {0} has {1} components")]
    DisconnectedMask(&'static str, usize),
    #[error("exponent must exceed 1, got {0}")]
    BadExponent(f64),
    #[error("no convergence after {iterations} iterations (last energy decrease {last_decrease:e})")]
    NotConverged { iterations: usize, last_decrease: f64 },
    #[error("level {0} is not in (0, 1)")]
    BadLevel(f64),
    #[error("field export: {0}")]
    Io(String),
}
