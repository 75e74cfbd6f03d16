use thiserror::Error;

use crate::grid::Representation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid scene, grid or run parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Amplitude reached the periodic grid boundary during spectral propagation.
    #[error("aliasing: edge amplitude {edge_ratio:.3e} of peak at z = {z} m exceeds guard {limit:.1e}")]
    Aliasing { z: f64, edge_ratio: f64, limit: f64 },

    #[error("expected a field in the {expected:?} representation, got {found:?}")]
    Representation {
        expected: Representation,
        found: Representation,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("wavefield is identically zero")]
    ZeroField,

    /// Arguments outside the domain of an operation (negative distance, empty list, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
