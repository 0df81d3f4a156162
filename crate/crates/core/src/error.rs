use thiserror::Error;

use crate::distortion::Configuration;

/// Errors raised across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("region has zero area")]
    EmptyRegion,

    #[error("sites {first} and {second} coincide")]
    DuplicateSites { first: usize, second: usize },

    #[error("degenerate sector: theta1 = theta2 = {0}")]
    DegenerateSector(f64),

    #[error("Voronoi cell of site {0} carries no mass")]
    EmptyCell(usize),

    #[error("iteration did not converge after {iterations} steps")]
    NoConvergence { iterations: usize, last: Configuration },

    #[error("1D iteration did not converge after {iterations} steps")]
    NoConvergence1D { iterations: usize, last: Vec<f64> },

    #[error("no root found for family {0}")]
    NoRoot(String),

    #[error("no feasible case pattern")]
    NoFeasibleCase,

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
