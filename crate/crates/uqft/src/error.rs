//! Error type shared by every module.

use thiserror::Error;

/// Failures reported by library operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A trajectory produced a non-finite position or velocity.
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    /// A velocity reached or exceeded the speed of light.
    #[error("superluminal velocity |v| = {speed} for particle {particle}")]
    Superluminal { particle: usize, speed: f64 },
    /// Two particles approached closer than the singularity guard.
    #[error("close approach r = {separation:e} below guard {guard:e} at lambda = {lambda:e}")]
    Singularity {
        lambda: f64,
        separation: f64,
        guard: f64,
    },
    /// An argument lies outside the domain where the formula is defined.
    #[error("out of range: {0}")]
    OutOfRange(String),
    /// A numerical procedure did not reach the requested tolerance.
    #[error("tolerance not reached: {0}")]
    Tolerance(String),
    /// A closed form is degenerate for the given inputs.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// An oracle grid is too coarse or too small for the packet it samples.
    #[error("grid resolution: {0}")]
    Resolution(String),
    /// No solution exists for the requested problem.
    #[error("no solution: {0}")]
    NoSolution(String),
    /// A function argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A differential equation reached a singular point.
    #[error("singular point: {0}")]
    SingularPoint(String),
    /// Inconsistent geometric input.
    #[error("geometric inconsistency: {0}")]
    Geometry(String),
    /// Invalid parameters supplied by the caller.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A result violated an invariant that holds by construction.
    #[error("internal consistency: {0}")]
    Internal(String),
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
