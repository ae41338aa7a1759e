//! Crate-wide error type.

use crate::peres_mermin::PmLabel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A state handed to a constructor was not normalized to the strict
    /// state-level tolerance.
    #[error("state norm {norm} is not 1 within 1e-12")]
    NotNormalized { norm: f64 },

    /// Raw components could not be normalized on ingest.
    #[error("state components have norm {norm} < 1e-6 and cannot be normalized")]
    NormTooSmall { norm: f64 },

    /// A measurement received a state whose norm drifted past the
    /// measurement-level tolerance.
    #[error("degenerate input: state norm {norm} deviates from 1 by more than 1e-9")]
    DegenerateState { norm: f64 },

    /// A table lookup required a label that was never assigned.
    #[error("hidden-value table has no value for {0:?}")]
    MissingLabel(PmLabel),

    /// Trajectory integration asked for a step coarser than the scheme
    /// tolerates.
    #[error("integration step {dt} exceeds the maximum {max} (half-duration / 1000)")]
    StepTooLarge { dt: f64, max: f64 },

    /// A device specification violated its geometric preconditions.
    #[error("invalid device: {0}")]
    DeviceGeometry(String),

    /// A scalar parameter was outside its documented range.
    #[error("parameter {name} = {value} out of range: {requirement}")]
    ParameterRange {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
}
