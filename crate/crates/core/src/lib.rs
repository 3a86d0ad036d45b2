//! Conformal capacities, path moduli and Hopf-link constructions for condensers in ℝ³ and S³.

pub mod geometry;
pub mod analytic;
pub mod pde;
pub mod topology;
pub mod graph;
pub mod symmetrization;
pub mod experiments;
