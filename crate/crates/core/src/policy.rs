//! Accumulation policies.
//!
//! A policy decides, after study `t` is observed, whether the series grows
//! to `t + 1` studies (probability `1 - hazard(t)`) and whether a
//! meta-analysis is performed on the first `t` studies. Both decisions see
//! only the data; no policy takes a hypothesis argument, which is what
//! lets the analysis-time probability cancel from likelihood ratios.

use crate::error::{invalid, Result};
use crate::meta::{MetaState, StudyOutcome};
use crate::normal;

/// Decision probabilities at one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyDecision {
    /// `1 - hazard(t)`: probability the series reaches `t + 1` studies.
    pub continue_prob: f64,
    /// Probability of a meta-analysis on the first `t` studies given `T >= t`.
    pub analyze_prob: f64,
}

impl PolicyDecision {
    pub fn new(continue_prob: f64, analyze_prob: f64) -> Result<Self> {
        check_unit("continue_prob", continue_prob)?;
        check_unit("analyze_prob", analyze_prob)?;
        Ok(Self {
            continue_prob,
            analyze_prob,
        })
    }

    pub fn hazard(&self) -> f64 {
        1.0 - self.continue_prob
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in [0, 1], got {v}")))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Where a single study Z-score falls relative to `±z_{alpha/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StudyCategory {
    SignificantPositive,
    NonSignificant,
    SignificantNegative,
}

impl StudyCategory {
    pub const ALL: [StudyCategory; 3] = [
        StudyCategory::SignificantPositive,
        StudyCategory::NonSignificant,
        StudyCategory::SignificantNegative,
    ];

    pub fn of(z: f64, critical: f64) -> Self {
        if z >= critical {
            StudyCategory::SignificantPositive
        } else if z <= -critical {
            StudyCategory::SignificantNegative
        } else {
            StudyCategory::NonSignificant
        }
    }

    /// Probability of the category for a standard normal Z-score.
    pub fn null_mass(self, alpha: f64) -> f64 {
        match self {
            StudyCategory::NonSignificant => 1.0 - alpha,
            _ => 0.5 * alpha,
        }
    }
}

/// New-study probabilities of the Gold Rush scenario.
///
/// The `*1` fields apply after the pilot study, the others after every
/// later study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldRushParams {
    pub omega_s1: f64,
    pub omega_x1: f64,
    pub omega_ns1: f64,
    pub omega_s: f64,
    pub omega_x: f64,
    pub omega_ns: f64,
    pub alpha: f64,
}

impl Default for GoldRushParams {
    fn default() -> Self {
        Self {
            omega_s1: 1.0,
            omega_x1: 0.0,
            omega_ns1: 0.1,
            omega_s: 1.0,
            omega_x: 0.0,
            omega_ns: 0.02,
            alpha: 0.05,
        }
    }
}

impl GoldRushParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_s1", self.omega_s1),
            ("omega_x1", self.omega_x1),
            ("omega_ns1", self.omega_ns1),
            ("omega_s", self.omega_s),
            ("omega_x", self.omega_x),
            ("omega_ns", self.omega_ns),
        ] {
            check_unit(name, v)?;
        }
        check_alpha(self.alpha)
    }

    /// New-study probability after study `t` given its category.
    pub fn omega(&self, t: u32, category: StudyCategory) -> f64 {
        let pilot = t <= 1;
        match (category, pilot) {
            (StudyCategory::SignificantPositive, true) => self.omega_s1,
            (StudyCategory::SignificantNegative, true) => self.omega_x1,
            (StudyCategory::NonSignificant, true) => self.omega_ns1,
            (StudyCategory::SignificantPositive, false) => self.omega_s,
            (StudyCategory::SignificantNegative, false) => self.omega_x,
            (StudyCategory::NonSignificant, false) => self.omega_ns,
        }
    }

    /// Expected continuation probability after study `t` under the null.
    pub fn null_continuation(&self, t: u32) -> f64 {
        StudyCategory::ALL
            .iter()
            .map(|&c| self.omega(t, c) * c.null_mass(self.alpha))
            .sum()
    }
}

/// Parameters of the power-law continuation model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawParams {
    pub delta_h1: f64,
    pub tau: f64,
}

impl PowerLawParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_h1 > 0.0 && self.delta_h1.is_finite()) {
            return Err(invalid(format!(
                "delta_h1 must be positive, got {}",
                self.delta_h1
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(invalid(format!("tau must be positive, got {}", self.tau)));
        }
        Ok(())
    }
}

/// Window `[a, b]` on the number of positive findings that triggers a
/// meta-analysis. A finding is positive when its mean difference exceeds
/// `delta_h1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingWindowParams {
    pub a: u32,
    pub b: u32,
    pub delta_h1: f64,
}

impl TimingWindowParams {
    pub fn validate(&self) -> Result<()> {
        if self.a > self.b {
            return Err(invalid(format!(
                "window requires a <= b, got [{}, {}]",
                self.a, self.b
            )));
        }
        if !(self.delta_h1 > 0.0 && self.delta_h1.is_finite()) {
            return Err(invalid(format!(
                "delta_h1 must be positive, got {}",
                self.delta_h1
            )));
        }
        Ok(())
    }
}

/// Gold Rush hazard of stopping after study `t` with Z-score `z_t`.
pub fn gold_rush_hazard(t: u32, z_t: f64, params: &GoldRushParams) -> f64 {
    let crit = normal::two_sided_critical(params.alpha);
    gold_rush_hazard_with(t, z_t, params, crit)
}

fn gold_rush_hazard_with(t: u32, z_t: f64, params: &GoldRushParams, crit: f64) -> f64 {
    1.0 - params.omega(t, StudyCategory::of(z_t, crit))
}

/// Power-law hazard after study `t`, driven by the previous cumulative
/// estimate `m_prev = M^(t-1)`. The first two hazards are zero.
pub fn power_law_hazard(t: u32, m_prev: f64, params: &PowerLawParams) -> f64 {
    if t <= 1 {
        return 0.0;
    }
    if m_prev > 0.0 && m_prev < params.delta_h1 {
        1.0 - (m_prev / params.delta_h1).powf(params.tau)
    } else {
        1.0
    }
}

/// Living-review stopping rule: stop as soon as the cumulative Z-score is
/// significant.
pub fn lsr_hazard(_t: u32, combined_z: f64, alpha: f64) -> f64 {
    lsr_hazard_with(combined_z, normal::two_sided_critical(alpha))
}

fn lsr_hazard_with(combined_z: f64, crit: f64) -> f64 {
    if combined_z.abs() >= crit {
        1.0
    } else {
        0.0
    }
}

/// Number of studies whose mean difference exceeds `delta_h1`.
pub fn positive_findings(studies: &[StudyOutcome], delta_h1: f64) -> u32 {
    studies.iter().filter(|s| s.mean_diff > delta_h1).count() as u32
}

/// 1 when the count of positive findings lies in `[a, b]`, else 0.
pub fn timing_window_analyze(studies: &[StudyOutcome], params: &TimingWindowParams) -> f64 {
    let c = positive_findings(studies, params.delta_h1);
    if (params.a..=params.b).contains(&c) {
        1.0
    } else {
        0.0
    }
}

/// `S(t-1) = prod_{i<t} (1 - hazard_i)` for hazards indexed from 0.
pub fn survival_from_hazards(hazards: &[f64]) -> Result<f64> {
    match hazards.first() {
        None => return Err(invalid("hazard list must contain lambda(0)")),
        Some(&h0) if h0 != 0.0 => {
            return Err(invalid(format!("lambda(0) must be 0, got {h0}")));
        }
        _ => {}
    }
    let mut s = 1.0;
    for &h in hazards {
        check_unit("hazard", h)?;
        s *= 1.0 - h;
    }
    Ok(s)
}

/// `P[T = t] = S(t-1) - S(t)` for `t = 1..survivals.len()-1`, where
/// `survivals[0] = S(0) = 1`.
pub fn stopping_mass(survivals: &[f64]) -> Result<Vec<f64>> {
    match survivals.first() {
        Some(&1.0) => {}
        Some(&s0) => return Err(invalid(format!("S(0) must be 1, got {s0}"))),
        None => return Err(invalid("empty survival list")),
    }
    let mut out = Vec::with_capacity(survivals.len() - 1);
    for w in survivals.windows(2) {
        if !(w[1] <= w[0]) || w[1] < 0.0 {
            return Err(invalid(format!(
                "survival must be nonincreasing and nonnegative: {} then {}",
                w[0], w[1]
            )));
        }
        out.push(w[0] - w[1]);
    }
    Ok(out)
}

/// When a policy performs its meta-analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisSchedule {
    /// After every study: `P[A^(t)] = 1` for all `t`.
    EveryStudy,
    /// Once, at a prespecified series size.
    AtSize(u32),
}

impl AnalysisSchedule {
    fn analyze_prob(self, t: u32) -> f64 {
        match self {
            AnalysisSchedule::EveryStudy => 1.0,
            AnalysisSchedule::AtSize(k) if k == t => 1.0,
            AnalysisSchedule::AtSize(_) => 0.0,
        }
    }
}

/// The data a policy may look at after study `t`: all outcomes so far and
/// the cumulative meta-analysis after each of them.
#[derive(Debug, Clone, Copy)]
pub struct History<'a> {
    pub outcomes: &'a [StudyOutcome],
    pub states: &'a [MetaState],
}

impl History<'_> {
    pub fn t(&self) -> u32 {
        self.outcomes.len() as u32
    }
}

/// The accumulation policies.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    GoldRush {
        params: GoldRushParams,
        schedule: AnalysisSchedule,
        critical: f64,
    },
    PowerLaw {
        params: PowerLawParams,
        schedule: AnalysisSchedule,
    },
    Lsr {
        alpha: f64,
        critical: f64,
    },
    TimingWindow {
        window: TimingWindowParams,
        continue_prob: f64,
    },
    /// Data-independent control: constant continuation and a fixed schedule.
    Independent {
        continue_prob: f64,
        schedule: AnalysisSchedule,
    },
}

impl Policy {
    pub fn gold_rush(params: GoldRushParams, schedule: AnalysisSchedule) -> Result<Self> {
        params.validate()?;
        check_schedule(schedule)?;
        Ok(Policy::GoldRush {
            params,
            schedule,
            critical: normal::two_sided_critical(params.alpha),
        })
    }

    pub fn power_law(params: PowerLawParams, schedule: AnalysisSchedule) -> Result<Self> {
        params.validate()?;
        check_schedule(schedule)?;
        Ok(Policy::PowerLaw { params, schedule })
    }

    pub fn lsr(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Policy::Lsr {
            alpha,
            critical: normal::two_sided_critical(alpha),
        })
    }

    pub fn timing_window(window: TimingWindowParams, continue_prob: f64) -> Result<Self> {
        window.validate()?;
        check_unit("continue_prob", continue_prob)?;
        Ok(Policy::TimingWindow {
            window,
            continue_prob,
        })
    }

    pub fn independent(continue_prob: f64, schedule: AnalysisSchedule) -> Result<Self> {
        check_unit("continue_prob", continue_prob)?;
        check_schedule(schedule)?;
        Ok(Policy::Independent {
            continue_prob,
            schedule,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Policy::GoldRush { .. } => "gold_rush",
            Policy::PowerLaw { .. } => "power_law",
            Policy::Lsr { .. } => "lsr",
            Policy::TimingWindow { .. } => "timing_window",
            Policy::Independent { .. } => "independent",
        }
    }

    /// Decision after the last study in `history`.
    pub fn decide(&self, history: History<'_>) -> PolicyDecision {
        let t = history.t();
        debug_assert!(t >= 1 && history.states.len() == history.outcomes.len());
        match self {
            Policy::GoldRush {
                params,
                schedule,
                critical,
            } => {
                let z = history.outcomes[t as usize - 1].z;
                PolicyDecision {
                    continue_prob: 1.0 - gold_rush_hazard_with(t, z, params, *critical),
                    analyze_prob: schedule.analyze_prob(t),
                }
            }
            Policy::PowerLaw { params, schedule } => {
                let m_prev = if t >= 2 {
                    history.states[t as usize - 2].combined_estimate
                } else {
                    0.0
                };
                PolicyDecision {
                    continue_prob: 1.0 - power_law_hazard(t, m_prev, params),
                    analyze_prob: schedule.analyze_prob(t),
                }
            }
            Policy::Lsr { critical, .. } => {
                let z = history.states[t as usize - 1].combined_z;
                PolicyDecision {
                    continue_prob: 1.0 - lsr_hazard_with(z, *critical),
                    analyze_prob: 1.0,
                }
            }
            Policy::TimingWindow {
                window,
                continue_prob,
            } => PolicyDecision {
                continue_prob: *continue_prob,
                analyze_prob: timing_window_analyze(history.outcomes, window),
            },
            Policy::Independent {
                continue_prob,
                schedule,
            } => PolicyDecision {
                continue_prob: *continue_prob,
                analyze_prob: schedule.analyze_prob(t),
            },
        }
    }

    /// Hazards `lambda(0), ..., lambda(t-1)` along the first `t` studies of
    /// a fully observed series.
    pub fn hazards(&self, outcomes: &[StudyOutcome]) -> Result<Vec<f64>> {
        let states = prefix_states(outcomes)?;
        let mut out = Vec::with_capacity(outcomes.len());
        out.push(0.0);
        for i in 1..outcomes.len() {
            let d = self.decide(History {
                outcomes: &outcomes[..i],
                states: &states[..i],
            });
            out.push(d.hazard());
        }
        Ok(out)
    }

    /// `S(t-1 | z_1..z_{t-1})`: probability the policy lets the series
    /// reach the last study of `outcomes`.
    pub fn survival(&self, outcomes: &[StudyOutcome]) -> Result<f64> {
        survival_from_hazards(&self.hazards(outcomes)?)
    }

    /// Analysis-time probability
    /// `A(t | z_1..z_t) = P[A^(t) | T >= t, z_1..z_t] * S(t-1 | z_1..z_{t-1})`.
    pub fn analysis_time_probability(&self, outcomes: &[StudyOutcome]) -> Result<f64> {
        let states = prefix_states(outcomes)?;
        let survival = self.survival(outcomes)?;
        let d = self.decide(History {
            outcomes,
            states: &states,
        });
        Ok(d.analyze_prob * survival)
    }
}

fn check_schedule(schedule: AnalysisSchedule) -> Result<()> {
    match schedule {
        AnalysisSchedule::AtSize(0) => Err(invalid("analysis size must be at least 1")),
        _ => Ok(()),
    }
}

/// Cumulative meta-analysis after each prefix of `outcomes`.
pub fn prefix_states(outcomes: &[StudyOutcome]) -> Result<Vec<MetaState>> {
    if outcomes.is_empty() {
        return Err(invalid("empty study list"));
    }
    crate::meta::combine_z(outcomes)?; // sigma_d check
    let mut acc = crate::meta::MetaAccumulator::new();
    Ok(outcomes
        .iter()
        .map(|s| {
            acc.push(s);
            acc.state()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn study(z: f64) -> StudyOutcome {
        StudyOutcome::from_z(z, 20, 1.0).unwrap()
    }

    #[test]
    fn gold_rush_hazard_examples() {
        let p = GoldRushParams::default();
        assert_eq!(gold_rush_hazard(2, 2.5, &p), 0.0);
        assert!((gold_rush_hazard(2, 0.0, &p) - 0.98).abs() < 1e-15);
        assert_eq!(gold_rush_hazard(1, -3.0, &p), 1.0);
        assert!((gold_rush_hazard(1, 0.3, &p) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn gold_rush_threshold_uses_exact_quantile() {
        let p = GoldRushParams::default();
        // 1.95996 is below z_{0.025} = 1.959963984...
        assert!((gold_rush_hazard(2, 1.959_96, &p) - 0.98).abs() < 1e-15);
        assert_eq!(gold_rush_hazard(2, 1.959_964, &p), 0.0);
    }

    #[test]
    fn gold_rush_negative_branch_uses_omega_x() {
        let p = GoldRushParams {
            omega_x: 0.3,
            omega_x1: 0.4,
            ..GoldRushParams::default()
        };
        assert!((gold_rush_hazard(1, -2.5, &p) - 0.6).abs() < 1e-15);
        assert!((gold_rush_hazard(5, -2.5, &p) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn power_law_examples() {
        let p = PowerLawParams {
            delta_h1: 0.4,
            tau: 1.0,
        };
        assert!((power_law_hazard(3, 0.2, &p) - 0.5).abs() < 1e-15);
        let p2 = PowerLawParams {
            delta_h1: 0.4,
            tau: 2.0,
        };
        assert_eq!(power_law_hazard(3, 0.48, &p2), 1.0);
        assert_eq!(power_law_hazard(1, 123.0, &p2), 0.0);
        assert_eq!(power_law_hazard(0, -5.0, &p2), 0.0);
        assert_eq!(power_law_hazard(4, 0.0, &p2), 1.0);
        assert_eq!(power_law_hazard(4, -0.1, &p2), 1.0);
        assert_eq!(power_law_hazard(4, 0.4, &p2), 1.0);
    }

    #[test]
    fn lsr_examples() {
        assert_eq!(lsr_hazard(5, 2.2, 0.05), 1.0);
        assert_eq!(lsr_hazard(5, 1.0, 0.05), 0.0);
        assert_eq!(lsr_hazard(1, -2.0, 0.05), 1.0);
    }

    #[test]
    fn timing_window_examples() {
        let w = TimingWindowParams {
            a: 1,
            b: 2,
            delta_h1: 0.5,
        };
        let pos = StudyOutcome::from_mean_diff(0.8, 20, 1.0).unwrap();
        let neg = StudyOutcome::from_mean_diff(0.1, 20, 1.0).unwrap();
        assert_eq!(timing_window_analyze(&[pos, pos, pos], &w), 0.0);
        assert_eq!(timing_window_analyze(&[pos, neg, pos], &w), 1.0);
        let wide = TimingWindowParams {
            a: 0,
            b: 5,
            delta_h1: 0.5,
        };
        assert_eq!(timing_window_analyze(&[neg, neg], &wide), 1.0);
        // exactly delta_h1 is not a positive finding
        let edge = StudyOutcome::from_mean_diff(0.5, 20, 1.0).unwrap();
        assert_eq!(positive_findings(&[edge], 0.5), 0);
    }

    #[test]
    fn survival_examples() {
        assert_eq!(survival_from_hazards(&[0.0]).unwrap(), 1.0);
        assert!((survival_from_hazards(&[0.0, 0.5, 0.5]).unwrap() - 0.25).abs() < 1e-15);
        let s1 = survival_from_hazards(&[0.0, 1.0]).unwrap();
        assert_eq!(s1, 0.0);
        assert_eq!(stopping_mass(&[1.0, s1]).unwrap(), vec![1.0]);
        assert!(survival_from_hazards(&[0.2, 0.5]).is_err());
        assert!(survival_from_hazards(&[]).is_err());
    }

    #[test]
    fn stopping_mass_examples() {
        let m = stopping_mass(&[1.0, 0.12, 0.0]).unwrap();
        assert!((m[0] - 0.88).abs() < 1e-15 && (m[1] - 0.12).abs() < 1e-15);
        assert_eq!(
            stopping_mass(&[1.0, 1.0, 1.0, 0.0]).unwrap(),
            vec![0.0, 0.0, 1.0]
        );
        assert_eq!(stopping_mass(&[1.0, 0.5, 0.25]).unwrap(), vec![0.5, 0.25]);
        assert!(stopping_mass(&[1.0, 0.5, 0.6]).is_err());
        assert!(stopping_mass(&[0.9, 0.5]).is_err());
    }

    #[test]
    fn pilot_survival_under_null_matches_category_masses() {
        let p = GoldRushParams::default();
        assert!((p.null_continuation(1) - 0.12).abs() < 1e-15);
        assert!((p.null_continuation(2) - 0.044).abs() < 1e-15);
    }

    #[test]
    fn power_law_policy_reads_previous_estimate() {
        let params = PowerLawParams {
            delta_h1: 0.5,
            tau: 1.0,
        };
        let pol = Policy::power_law(params, AnalysisSchedule::EveryStudy).unwrap();
        let a = StudyOutcome::from_mean_diff(0.25, 20, 1.0).unwrap();
        let b = StudyOutcome::from_mean_diff(-3.0, 20, 1.0).unwrap();
        let h = pol.hazards(&[a, b, a]).unwrap();
        // lambda(1) = 0; lambda(2) uses M^(1) = 0.25 -> 0.5
        assert_eq!(h[0], 0.0);
        assert_eq!(h[1], 0.0);
        assert!((h[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn analysis_time_probability_gold_rush() {
        let pol =
            Policy::gold_rush(GoldRushParams::default(), AnalysisSchedule::EveryStudy).unwrap();
        // nonsignificant pilot, significant second, anything third
        let a = pol
            .analysis_time_probability(&[study(0.5), study(2.5), study(-1.0)])
            .unwrap();
        assert!((a - 0.1).abs() < 1e-15);
        let b = pol
            .analysis_time_probability(&[study(0.5), study(0.1), study(-1.0)])
            .unwrap();
        assert!((b - 0.002).abs() < 1e-15);
        let at2 =
            Policy::gold_rush(GoldRushParams::default(), AnalysisSchedule::AtSize(2)).unwrap();
        assert_eq!(
            at2.analysis_time_probability(&[study(0.5), study(2.5), study(-1.0)])
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn constructors_validate() {
        assert!(Policy::lsr(0.0).is_err());
        assert!(Policy::independent(1.5, AnalysisSchedule::EveryStudy).is_err());
        assert!(Policy::independent(0.5, AnalysisSchedule::AtSize(0)).is_err());
        let bad = GoldRushParams {
            omega_ns: -0.1,
            ..Default::default()
        };
        assert!(Policy::gold_rush(bad, AnalysisSchedule::EveryStudy).is_err());
        assert!(Policy::timing_window(
            TimingWindowParams {
                a: 3,
                b: 1,
                delta_h1: 0.2
            },
            0.5
        )
        .is_err());
        assert!(PolicyDecision::new(0.5, 1.1).is_err());
    }

    proptest! {
        #[test]
        fn stopping_mass_and_tail_sum_to_one(hs in prop::collection::vec(0.0f64..=1.0, 1..40)) {
            let mut hazards = vec![0.0];
            hazards.extend(hs);
            let mut survivals = Vec::new();
            for k in 1..=hazards.len() {
                survivals.push(survival_from_hazards(&hazards[..k]).unwrap());
            }
            // survival is nonincreasing as the list extends
            for w in survivals.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
            let mass = stopping_mass(&survivals).unwrap();
            prop_assert!(mass.iter().all(|&m| m >= 0.0));
            let total: f64 = mass.iter().sum::<f64>() + survivals.last().unwrap();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn decisions_are_probabilities(zs in prop::collection::vec(-5.0f64..5.0, 1..12)) {
            let outcomes: Vec<_> = zs.iter().map(|&z| study(z)).collect();
            let states = prefix_states(&outcomes).unwrap();
            let policies = [
                Policy::gold_rush(GoldRushParams::default(), AnalysisSchedule::EveryStudy).unwrap(),
                Policy::power_law(PowerLawParams { delta_h1: 0.3, tau: 1.5 }, AnalysisSchedule::AtSize(3)).unwrap(),
                Policy::lsr(0.05).unwrap(),
                Policy::timing_window(TimingWindowParams { a: 1, b: 2, delta_h1: 0.3 }, 0.9).unwrap(),
                Policy::independent(0.7, AnalysisSchedule::EveryStudy).unwrap(),
            ];
            for p in &policies {
                let d = p.decide(History { outcomes: &outcomes, states: &states });
                prop_assert!(PolicyDecision::new(d.continue_prob, d.analyze_prob).is_ok());
                let a = p.analysis_time_probability(&outcomes).unwrap();
                prop_assert!((0.0..=1.0).contains(&a));
            }
        }
    }
}
