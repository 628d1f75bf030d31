use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid joint distribution: {0}")]
    InvalidDistribution(ValidationReport),
    #[error("invalid conditional table: column given {given} sums to {sum} (tolerance {tolerance:e})")]
    InvalidConditional { given: crate::model::Outcome, sum: f64, tolerance: f64 },
    #[error("conditional probability entry {value} outside [0, 1]")]
    ConditionalOutOfRange { value: f64 },
    #[error("correlation coefficient {0} outside [-1, 1]")]
    CorrelationOutOfRange(f64),
    #[error("velocity {0} m/s is not subluminal")]
    Superluminal(f64),
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),
    #[error("mixed markings (one u, one d) have no defined impact class")]
    MixedMarkings,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("state norm {0} differs from 1")]
    NotNormalized(f64),
    #[error("preparation has cross terms |HV>, |VH>; only two-class (HH/VV) preparations are supported")]
    UnsupportedPreparation,
    #[error("conditioning outcome {0} of the before impact has zero probability")]
    DegenerateConditioning(crate::model::Outcome),
    #[error("marginal of party {party} is not uniform ({plus}, {minus}); maximal entanglement required")]
    NotMaximallyEntangled { party: u8, plus: f64, minus: f64 },
}
