#![doc = include_str!("../README.md")]

pub mod cli;
pub mod config;
mod dd;
pub mod error;
pub mod grid;
pub mod model;
pub mod montecarlo;
pub mod quantum;
pub mod rnl;
pub mod timing;

pub use error::{Error, Result};
pub use model::{ConditionalTable, Correlation, JointDistribution, Marginal, Outcome, Party};
pub use quantum::{AnalyzerSettings, TwoPhotonState};
pub use rnl::{predict, PredictionReport};
pub use timing::{ExperimentLabel, ImpactClass, ImpactEvent, Marking, SetupGeometry};

/// The guide's chapters, compiled as doc-tests so every snippet stays in
/// sync with the library.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    pub mod intro {}
    #[doc = include_str!("../../../book/src/outcomes.md")]
    pub mod outcomes {}
    #[doc = include_str!("../../../book/src/timing.md")]
    pub mod timing {}
    #[doc = include_str!("../../../book/src/quantum.md")]
    pub mod quantum {}
    #[doc = include_str!("../../../book/src/rnl.md")]
    pub mod rnl {}
    #[doc = include_str!("../../../book/src/montecarlo.md")]
    pub mod montecarlo {}
    #[doc = include_str!("../../../book/src/config.md")]
    pub mod config {}
}
