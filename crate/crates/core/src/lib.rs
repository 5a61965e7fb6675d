//! Sufficient-component-cause (SCC) model of a binary prognostic marker.
//!
//! * [`model`]: cause probabilities ↔ contingency table, performance metrics,
//!   stability indices.
//! * [`transport`]: moving a marker to a new population by predictive
//!   values, by accuracy, or by a common odds ratio on all causes.
//! * [`divergence`]: information loss of an implied table, in bits.
//! * [`popgen`]: odds-ratio sweeps and seeded random population scenarios.
//! * [`experiments`]: worked example, prevalence sweeps, information-loss
//!   simulation.
//! * [`report`] and [`cli`]: output formats and the `scc` binary.

pub mod cli;
pub mod divergence;
pub mod error;
pub mod experiments;
pub mod model;
pub mod popgen;
pub mod report;
pub mod transport;

pub use error::{Result, SccError};
pub use model::{
    causes_to_table, metrics, prevalence_from_causes, risk_equation, stability_indices,
    symmetric_setup_table, table_to_causes, CauseProbabilities, ContingencyTable,
    PerformanceMetrics, RiskEquation, StabilityIndices,
};
