//! Benchmarks for the accumulation bias simulator live in `benches/`.

use accbias_core::{AnalysisSchedule, GoldRushParams, Policy, SimConfig};

/// Gold Rush policy with the default parameters, analyzing every study.
pub fn default_gold_rush() -> Policy {
    Policy::gold_rush(GoldRushParams::default(), AnalysisSchedule::EveryStudy)
        .expect("default parameters are valid")
}

pub fn null_config(replications: u64) -> SimConfig {
    SimConfig {
        replications,
        ..SimConfig::default()
    }
}
