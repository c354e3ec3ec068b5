//! Seeded Monte Carlo simulation of study series.
//!
//! Replication `i` draws from two generators seeded from `(seed, i)`: one
//! for study data and one for continuation and analysis decisions. Results
//! therefore do not depend on how replications are split across threads.
//! Replications are processed in fixed-size chunks whose summaries are
//! merged in chunk order, which makes floating-point sums reproducible too.

use std::collections::BTreeMap;

use rand::RngExt;
use rand_distr::StandardNormal;
use rand_pcg::Pcg64Mcg;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::inference::DecisionRule;
use crate::meta::{MetaAccumulator, MetaState, StudyOutcome};
use crate::policy::{History, Policy};
use crate::stats::{Histogram, Moments, RateEstimate};

/// Replications per work unit. Fixed so that merge order never depends on
/// the thread count.
pub const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub replications: u64,
    pub seed: u64,
    /// Hard horizon; series still going at this size are censored.
    pub t_cap: u32,
    /// Mean of each study Z-score: 0 under H0, delta under H1.
    pub hypothesis_mean: f64,
    pub equal_n: u32,
    pub sigma_d: f64,
    /// Per-study sizes for unequal-n series; the last entry repeats.
    pub sizes: Option<Vec<u32>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            replications: 100_000,
            seed: 1,
            t_cap: 100,
            hypothesis_mean: 0.0,
            equal_n: 50,
            sigma_d: 1.0,
            sizes: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(invalid("replications must be at least 1"));
        }
        if self.t_cap == 0 {
            return Err(invalid("t_cap must be at least 1"));
        }
        if !self.hypothesis_mean.is_finite() {
            return Err(invalid("hypothesis_mean must be finite"));
        }
        if self.equal_n == 0 {
            return Err(invalid("equal_n must be at least 1"));
        }
        if !(self.sigma_d.is_finite() && self.sigma_d > 0.0) {
            return Err(invalid("sigma_d must be positive"));
        }
        if let Some(sizes) = &self.sizes {
            if sizes.is_empty() || sizes.contains(&0) {
                return Err(invalid(
                    "sizes must be a nonempty list of positive integers",
                ));
            }
        }
        Ok(())
    }

    fn size_at(&self, t: u32) -> u32 {
        match &self.sizes {
            Some(sizes) => sizes[(t as usize - 1).min(sizes.len() - 1)],
            None => self.equal_n,
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn stream_state(seed: u64, index: u64, lane: u64) -> u128 {
    let hi = splitmix64(seed ^ splitmix64(index.wrapping_mul(2).wrapping_add(lane)));
    let lo = splitmix64(hi ^ 0x6A09_E667_F3BC_C909);
    (u128::from(hi) << 64) | u128::from(lo)
}

/// The two generators of one replication.
#[derive(Debug, Clone)]
pub struct ReplicationStreams {
    pub data: Pcg64Mcg,
    pub decisions: Pcg64Mcg,
}

impl ReplicationStreams {
    /// Lane 0 of `splitmix64(seed ^ splitmix64(2 i + lane))` feeds the data
    /// generator and lane 1 the decision generator.
    pub fn for_replication(seed: u64, index: u64) -> Self {
        Self {
            data: Pcg64Mcg::new(stream_state(seed, index, 0)),
            decisions: Pcg64Mcg::new(stream_state(seed, index, 1)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeriesTrajectory {
    pub outcomes: Vec<StudyOutcome>,
    pub t_realized: u32,
    /// The series reached `t_cap` and would have continued.
    pub censored: bool,
    pub analysis_times: Vec<u32>,
    pub meta_states: Vec<MetaState>,
}

impl SeriesTrajectory {
    fn clear(&mut self) {
        self.outcomes.clear();
        self.t_realized = 0;
        self.censored = false;
        self.analysis_times.clear();
        self.meta_states.clear();
    }
}

/// Simulates one series.
pub fn simulate_series(
    policy: &Policy,
    config: &SimConfig,
    streams: &mut ReplicationStreams,
) -> SeriesTrajectory {
    let mut out = SeriesTrajectory::default();
    simulate_series_into(policy, config, streams, &mut out);
    out
}

/// As [`simulate_series`], reusing the buffers of `out`.
///
/// Each study consumes one normal draw from the data stream and exactly two
/// uniforms from the decision stream (analysis, then continuation), so the
/// decision draws depend only on the stream and not on the data.
pub fn simulate_series_into(
    policy: &Policy,
    config: &SimConfig,
    streams: &mut ReplicationStreams,
    out: &mut SeriesTrajectory,
) {
    out.clear();
    let mut acc = MetaAccumulator::new();
    for t in 1..=config.t_cap {
        let n = config.size_at(t);
        let noise: f64 = streams.data.sample(StandardNormal);
        let z = config.hypothesis_mean + noise;
        let study = StudyOutcome {
            z,
            n,
            mean_diff: z * config.sigma_d / f64::from(n).sqrt(),
            sigma_d: config.sigma_d,
        };
        acc.push(&study);
        out.outcomes.push(study);
        out.meta_states.push(acc.state());
        let decision = policy.decide(History {
            outcomes: &out.outcomes,
            states: &out.meta_states,
        });
        let u_analyze: f64 = streams.decisions.random();
        let u_continue: f64 = streams.decisions.random();
        if u_analyze < decision.analyze_prob {
            out.analysis_times.push(t);
        }
        let go_on = u_continue < decision.continue_prob;
        if !go_on {
            break;
        }
        if t == config.t_cap {
            out.censored = true;
        }
    }
    out.t_realized = out.outcomes.len() as u32;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TimeCounts {
    pub series_reaching: u64,
    pub analyses: u64,
    pub rejections: u64,
}

/// Mergeable counts of analyses and rejections. `per_t[t - 1]` holds size
/// `t`; `first_error[t - 1]` counts series whose first rejection was at `t`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ErrorTally {
    pub per_t: Vec<TimeCounts>,
    pub series_total: u64,
    pub series_with_any_rejection: u64,
    pub first_error: Vec<u64>,
    pub censored: u64,
}

fn grow<T: Default + Clone>(v: &mut Vec<T>, len: usize) {
    if v.len() < len {
        v.resize(len, T::default());
    }
}

impl ErrorTally {
    pub fn record(&mut self, trajectory: &SeriesTrajectory, rule: &DecisionRule) {
        let len = trajectory.t_realized as usize;
        grow(&mut self.per_t, len);
        self.series_total += 1;
        if trajectory.censored {
            self.censored += 1;
        }
        for c in &mut self.per_t[..len] {
            c.series_reaching += 1;
        }
        let mut first = true;
        for &t in &trajectory.analysis_times {
            let i = t as usize - 1;
            self.per_t[i].analyses += 1;
            if rule.rejects(&trajectory.meta_states[i]) {
                self.per_t[i].rejections += 1;
                if first {
                    first = false;
                    grow(&mut self.first_error, i + 1);
                    self.first_error[i] += 1;
                    self.series_with_any_rejection += 1;
                }
            }
        }
    }

    pub fn merge(&mut self, other: &ErrorTally) {
        grow(&mut self.per_t, other.per_t.len());
        for (a, b) in self.per_t.iter_mut().zip(&other.per_t) {
            a.series_reaching += b.series_reaching;
            a.analyses += b.analyses;
            a.rejections += b.rejections;
        }
        grow(&mut self.first_error, other.first_error.len());
        for (a, b) in self.first_error.iter_mut().zip(&other.first_error) {
            *a += b;
        }
        self.series_total += other.series_total;
        self.series_with_any_rejection += other.series_with_any_rejection;
        self.censored += other.censored;
    }

    /// Counts at size `t` (zero beyond the longest series).
    pub fn at(&self, t: u32) -> TimeCounts {
        (t as usize)
            .checked_sub(1)
            .and_then(|i| self.per_t.get(i).copied())
            .unwrap_or_default()
    }

    pub fn first_error_at(&self, t: u32) -> u64 {
        (t as usize)
            .checked_sub(1)
            .and_then(|i| self.first_error.get(i).copied())
            .unwrap_or(0)
    }

    pub fn max_t(&self) -> u32 {
        self.per_t.len() as u32
    }
}

/// Rejection rate among analyses performed at size `t`.
pub fn conditional_rate(tally: &ErrorTally, t: u32) -> Result<RateEstimate> {
    let c = tally.at(t);
    if c.analyses == 0 {
        return Err(Error::UndefinedRate {
            t,
            series_reaching: c.series_reaching,
        });
    }
    RateEstimate::binomial(c.rejections, c.analyses)
}

/// Fraction of series with at least one rejection at an analysis time.
pub fn surviving_rate(tally: &ErrorTally) -> Result<RateEstimate> {
    RateEstimate::binomial(tally.series_with_any_rejection, tally.series_total)
}

/// `(t, count)` for every size at which some series had its first
/// rejection. The counts sum to `series_with_any_rejection`.
pub fn first_error_decomposition(tally: &ErrorTally) -> Vec<(u32, u64)> {
    tally
        .first_error
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i as u32 + 1, c))
        .collect()
}

/// What to collect besides the tally.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOptions {
    /// Sizes `t` at which to histogram `Z^(t)` over series with `T >= t`.
    pub histogram_times: Vec<u32>,
    /// Sizes at which to keep every `Z^(t)` value, in replication order.
    pub sample_times: Vec<u32>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub tally: ErrorTally,
    pub histograms: BTreeMap<u32, Histogram>,
    pub moments: BTreeMap<u32, Moments>,
    pub samples: BTreeMap<u32, Vec<f64>>,
}

impl ExperimentResult {
    fn empty(options: &ExperimentOptions) -> Self {
        Self {
            tally: ErrorTally::default(),
            histograms: options
                .histogram_times
                .iter()
                .map(|&t| (t, Histogram::standard()))
                .collect(),
            moments: options
                .histogram_times
                .iter()
                .map(|&t| (t, Moments::default()))
                .collect(),
            samples: options
                .sample_times
                .iter()
                .map(|&t| (t, Vec::new()))
                .collect(),
        }
    }

    fn merge(&mut self, other: ExperimentResult) {
        self.tally.merge(&other.tally);
        for (t, h) in other.histograms {
            self.histograms.get_mut(&t).expect("same layout").merge(&h);
        }
        for (t, m) in other.moments {
            self.moments.get_mut(&t).expect("same layout").merge(&m);
        }
        for (t, s) in other.samples {
            self.samples.get_mut(&t).expect("same layout").extend(s);
        }
    }
}

/// Folds `visit` over every replication and merges the per-chunk
/// accumulators in chunk order.
pub fn fold_replications<A, I, V, M>(
    policy: &Policy,
    config: &SimConfig,
    threads: Option<usize>,
    init: I,
    visit: V,
    merge: M,
) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, &SeriesTrajectory) + Sync,
    M: Fn(&mut A, A),
{
    config.validate()?;
    let chunks = config.replications.div_ceil(CHUNK);
    let run_chunk = |k: u64| {
        let mut acc = init();
        let mut traj = SeriesTrajectory::default();
        let end = ((k + 1) * CHUNK).min(config.replications);
        for i in k * CHUNK..end {
            let mut streams = ReplicationStreams::for_replication(config.seed, i);
            simulate_series_into(policy, config, &mut streams, &mut traj);
            visit(&mut acc, &traj);
        }
        acc
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    // Work through the chunks in batches so that finished chunk results do
    // not pile up in memory; each batch is merged in index order.
    let batch = (pool.current_num_threads() as u64 * 8).max(1);
    let mut total = init();
    let mut start = 0;
    while start < chunks {
        let stop = (start + batch).min(chunks);
        let parts: Vec<A> = pool.install(|| (start..stop).into_par_iter().map(run_chunk).collect());
        for part in parts {
            merge(&mut total, part);
        }
        start = stop;
    }
    Ok(total)
}

/// Simulates `config.replications` series under `policy`, tallies the
/// decisions of `rule` at every analysis time and collects the requested
/// sampling distributions.
pub fn run_experiment(
    policy: &Policy,
    config: &SimConfig,
    rule: &DecisionRule,
    options: &ExperimentOptions,
) -> Result<ExperimentResult> {
    if options
        .histogram_times
        .iter()
        .chain(&options.sample_times)
        .any(|&t| t == 0 || t > config.t_cap)
    {
        return Err(invalid("collection times must lie in 1..=t_cap"));
    }
    fold_replications(
        policy,
        config,
        options.threads,
        || ExperimentResult::empty(options),
        |acc, traj| {
            acc.tally.record(traj, rule);
            for (&t, h) in acc.histograms.iter_mut() {
                if let Some(s) = traj.meta_states.get(t as usize - 1) {
                    h.push(s.combined_z);
                }
            }
            for (&t, m) in acc.moments.iter_mut() {
                if let Some(s) = traj.meta_states.get(t as usize - 1) {
                    m.push(s.combined_z);
                }
            }
            for (&t, v) in acc.samples.iter_mut() {
                if let Some(s) = traj.meta_states.get(t as usize - 1) {
                    v.push(s.combined_z);
                }
            }
        },
        |total, part| total.merge(part),
    )
}
