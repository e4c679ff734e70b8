use std::path::PathBuf;

use thiserror::Error;

/// Which admissibility floor a node violated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Floor {
    Density,
    Pressure,
}

impl std::fmt::Display for Floor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Floor::Density => f.write_str("density"),
            Floor::Pressure => f.write_str("pressure"),
        }
    }
}

/// Location of a node inside a [`crate::SolutionField`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct NodeLocation {
    pub element: usize,
    pub i: usize,
    pub j: usize,
}

impl std::fmt::Display for NodeLocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "element {} node ({}, {})", self.element, self.i, self.j)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polynomial degree {0}: must be at least 1")]
    InvalidDegree(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-positive density {rho}")]
    NonPositiveDensity { rho: f64 },

    #[error("inadmissible state (rho = {rho}, p = {p})")]
    InadmissibleState { rho: f64, p: f64 },

    #[error("inadmissible {floor} at {location}: rho = {rho}, p = {p}")]
    InadmissibleNode {
        location: NodeLocation,
        floor: Floor,
        rho: f64,
        p: f64,
    },

    #[error("safe solution inadmissible at {location} during stage {stage}: {floor} (rho = {rho}, p = {p})")]
    SafeViolation {
        location: NodeLocation,
        stage: usize,
        floor: Floor,
        rho: f64,
        p: f64,
    },

    #[error("blending coefficient {value} of element {element} outside [0, 1]")]
    AlphaOutOfRange { element: usize, value: f64 },

    #[error("blending correction for element {element} would lower alpha from {current} to {requested}")]
    AlphaDecrease {
        element: usize,
        current: f64,
        requested: f64,
    },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("empty statistics window")]
    EmptyWindow,

    #[error("config error for key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("solver aborted at step {step}, t = {time}: {source}")]
    Aborted {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
