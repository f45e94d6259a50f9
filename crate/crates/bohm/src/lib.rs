//! Grid wavefunctions, split-step evolution, probability current, quantum
//! potential and Bohmian trajectories guided by `ṙ = j/|ψ|²`.

pub mod current;
pub mod demos;
pub mod equivariance;
pub mod error;
pub mod evolve;
pub mod fft;
pub mod grid;
pub mod interp;
pub mod measure;
pub mod output;
pub mod potential;
pub mod trajectories;

pub use current::{continuity_refinement, continuity_residual, probability_current, GradientScheme, RefinementStudy};
pub use equivariance::{equivariance_test, EquivarianceConfig, EquivarianceReport, EquivarianceRun};
pub use error::{BohmError, Result};
pub use evolve::{evolve_grid, Coupling, SplitStepPropagator};
pub use grid::{Axis, GridWavefunction};
pub use measure::{
    momentum_measurement_probe, position_measurement_model, MomentumProbeConfig, MomentumProbeReport,
    PositionMeasurementConfig, PositionMeasurementReport,
};
pub use output::{write_density_csv, TrajectoryLog};
pub use potential::quantum_potential;
pub use trajectories::{advance_trajectories, TrajectoryEnsemble, TrajectoryOptions, TrajectoryStepper};
