use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BohmError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("unstable time step: stability number {number:.4} is not below {limit}")]
    UnstableStep { number: f64, limit: f64 },
    #[error(
        "particle {particle} reached a wavefunction node at t = {time}: density {density:e} below {threshold:e}"
    )]
    NodeEncounter {
        particle: usize,
        time: f64,
        density: f64,
        threshold: f64,
    },
    #[error("particle {particle} left the grid interior at t = {time}")]
    LeftGrid { particle: usize, time: f64 },
    #[error("grid too coarse: pointer width {sigma} is below 3 dx = {limit}")]
    GridTooCoarse { sigma: f64, limit: f64 },
    #[error("need at least {needed} particles, got {got}")]
    TooFewParticles { needed: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, BohmError>;
