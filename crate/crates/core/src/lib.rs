//! Accumulation bias in meta-analysis.
//!
//! Study series grow, and meta-analyses happen, depending on the results
//! seen so far. This crate models that process ([`policy`]), quantifies the
//! resulting bias of conventional Z-tests in closed form ([`analytics`]) and
//! by simulation ([`engine`]), and provides likelihood-ratio based decision
//! rules whose error guarantees do not depend on the process
//! ([`inference`]).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod engine;
pub mod error;
pub mod inference;
pub mod meta;
pub mod normal;
pub mod policy;
pub mod quadrature;
pub mod stats;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use engine::{
    run_experiment, simulate_series, ErrorTally, ExperimentOptions, ExperimentResult,
    ReplicationStreams, SeriesTrajectory, SimConfig,
};
pub use error::{Error, Result};
pub use inference::{Alternative, DecisionRule, SimpleAlternative};
pub use meta::{combine_estimate, combine_z, MetaState, StudyOutcome};
pub use policy::{
    AnalysisSchedule, GoldRushParams, Policy, PolicyDecision, PowerLawParams, StudyCategory,
    TimingWindowParams,
};
