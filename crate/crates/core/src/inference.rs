//! Likelihood-ratio decision rules.
//!
//! The likelihood ratio of a series depends on the data only; the factors
//! describing how the series grew and when it was analyzed are identical
//! under both hypotheses and cancel. None of the functions here take a
//! policy argument for that reason.

use crate::engine::{ErrorTally, SeriesTrajectory};
use crate::error::{invalid, Error, Result};
use crate::meta::{MetaState, StudyOutcome};
use crate::normal;
use crate::quadrature::simpson;

/// Per-study Z-scores distributed `Normal(delta, 1)` under the alternative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleAlternative {
    pub delta: f64,
}

impl SimpleAlternative {
    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(invalid(format!(
                "alternative delta must be finite, got {delta}"
            )));
        }
        Ok(Self { delta })
    }

    /// `delta = sqrt(n) * effect / sigma_d` for a minimally relevant effect.
    pub fn from_effect(effect: f64, n: u32, sigma_d: f64) -> Result<Self> {
        if n == 0 || !(sigma_d > 0.0) {
            return Err(invalid("from_effect needs n >= 1 and sigma_d > 0"));
        }
        Self::new(f64::from(n).sqrt() * effect / sigma_d)
    }

    /// `delta * sum_z - t * delta^2 / 2`.
    pub fn log_lr_from_sum(&self, sum_z: f64, t: u32) -> f64 {
        self.delta * sum_z - f64::from(t) * self.delta * self.delta / 2.0
    }
}

/// The alternative a likelihood ratio is computed against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alternative {
    Simple(SimpleAlternative),
    /// `1/2 Normal(delta, 1) + 1/2 Normal(-delta, 1)` over the whole series,
    /// for two-sided monitoring.
    Symmetric(SimpleAlternative),
}

impl Alternative {
    pub fn simple(delta: f64) -> Result<Self> {
        SimpleAlternative::new(delta).map(Alternative::Simple)
    }

    pub fn symmetric(delta: f64) -> Result<Self> {
        SimpleAlternative::new(delta).map(Alternative::Symmetric)
    }

    pub fn delta(&self) -> f64 {
        match self {
            Alternative::Simple(a) | Alternative::Symmetric(a) => a.delta,
        }
    }

    pub fn log_lr_from_sum(&self, sum_z: f64, t: u32) -> f64 {
        match self {
            Alternative::Simple(a) => a.log_lr_from_sum(sum_z, t),
            Alternative::Symmetric(a) => {
                let up = a.log_lr_from_sum(sum_z, t);
                let down = a.log_lr_from_sum(-sum_z, t);
                let hi = up.max(down);
                hi + (0.5 * ((up - hi).exp() + (down - hi).exp())).ln()
            }
        }
    }

    pub fn log_lr(&self, state: &MetaState) -> f64 {
        self.log_lr_from_sum(state.sum_z, state.t)
    }
}

impl From<SimpleAlternative> for Alternative {
    fn from(a: SimpleAlternative) -> Self {
        Alternative::Simple(a)
    }
}

/// Two-sided Z-test at level `alpha`.
pub fn z_test(meta: &MetaState, alpha: f64) -> bool {
    meta.combined_z.abs() >= normal::two_sided_critical(alpha)
}

/// Log likelihood ratio of `Normal(delta, 1)` against `Normal(0, 1)` for
/// the study Z-scores.
pub fn log_lr(studies: &[StudyOutcome], alt: &SimpleAlternative) -> f64 {
    let sum: f64 = studies.iter().map(|s| s.z).sum();
    alt.log_lr_from_sum(sum, studies.len() as u32)
}

/// `E_0[exp(delta Z - delta^2 / 2)]` by Simpson quadrature; equals 1.
pub fn betting_factor_expectation_check(alt: &SimpleAlternative) -> f64 {
    let d = alt.delta;
    // The integrand is the Normal(d, 1) density, so 14 sd either side of
    // both 0 and d leaves a tail far below the tolerance.
    let lo = d.min(0.0) - 14.0;
    let hi = d.max(0.0) + 14.0;
    let panels = ((hi - lo) / 0.01).ceil() as usize;
    simpson(
        |z| (normal::ln_pdf(z) + d * z - d * d / 2.0).exp(),
        lo,
        hi,
        panels,
    )
}

fn check_prior(pi: f64) -> Result<()> {
    if pi > 0.0 && pi < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!(
            "prior probability must lie in (0, 1), got {pi}"
        )))
    }
}

/// Posterior odds `LR * pi / (1 - pi)`.
pub fn posterior_odds(log_lr_value: f64, pi: f64) -> Result<f64> {
    check_prior(pi)?;
    Ok((log_lr_value + (pi / (1.0 - pi)).ln()).exp())
}

/// Rejection threshold on the posterior odds, `gamma * pi / (1 - pi)`.
/// Also the positive predictive odds guaranteed by the rule.
pub fn odds_threshold(gamma: f64, pi: f64) -> Result<f64> {
    check_prior(pi)?;
    if !(gamma > 0.0) {
        return Err(invalid(format!("gamma must be positive, got {gamma}")));
    }
    Ok(gamma * pi / (1.0 - pi))
}

/// Reject iff `odds >= gamma * pi / (1 - pi)`.
pub fn reject_conditional(odds: f64, gamma: f64, pi: f64) -> Result<bool> {
    Ok(odds >= odds_threshold(gamma, pi)?)
}

/// Positive predictive value implied by rejecting at posterior odds of at
/// least `gamma * pi / (1 - pi)`.
pub fn ppv_readout(gamma: f64, pi: f64) -> Result<f64> {
    let o = odds_threshold(gamma, pi)?;
    Ok(o / (1.0 + o))
}

/// How a meta-analysis is turned into a reject / no-reject decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionRule {
    ZTest {
        alpha: f64,
        critical: f64,
    },
    LrThreshold {
        alpha: f64,
        alt: Alternative,
    },
    PosteriorOdds {
        gamma: f64,
        pi: f64,
        alt: Alternative,
    },
}

impl DecisionRule {
    pub fn z_test(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(DecisionRule::ZTest {
            alpha,
            critical: normal::two_sided_critical(alpha),
        })
    }

    pub fn lr_threshold(alpha: f64, alt: Alternative) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(DecisionRule::LrThreshold { alpha, alt })
    }

    pub fn posterior_odds(gamma: f64, pi: f64, alt: Alternative) -> Result<Self> {
        odds_threshold(gamma, pi)?;
        Ok(DecisionRule::PosteriorOdds { gamma, pi, alt })
    }

    pub fn name(&self) -> &'static str {
        match self {
            DecisionRule::ZTest { .. } => "z_test",
            DecisionRule::LrThreshold { .. } => "lr_threshold",
            DecisionRule::PosteriorOdds { .. } => "posterior_odds",
        }
    }

    pub fn rejects(&self, state: &MetaState) -> bool {
        match self {
            DecisionRule::ZTest { critical, .. } => state.combined_z.abs() >= *critical,
            DecisionRule::LrThreshold { alpha, alt } => alt.log_lr(state) >= -alpha.ln(),
            // odds >= gamma pi/(1-pi) is LR >= gamma; compared in log space.
            DecisionRule::PosteriorOdds { gamma, alt, .. } => alt.log_lr(state) >= gamma.ln(),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// First analysis time at which `LR >= 1/alpha`, if any.
pub fn surviving_monitor(
    trajectory: &SeriesTrajectory,
    alt: &Alternative,
    alpha: f64,
) -> Option<u32> {
    let bound = -alpha.ln();
    trajectory
        .analysis_times
        .iter()
        .copied()
        .find(|&t| alt.log_lr(&trajectory.meta_states[t as usize - 1]) >= bound)
}

/// Whether a ratio is a point estimate or a one-sided lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioKind {
    Estimate,
    /// No rejections under H0: the ratio is bounded below using the exact
    /// 95% upper limit on the H0 rate.
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioEstimate {
    pub ratio: f64,
    pub se: f64,
    pub kind: RatioKind,
}

fn ratio_of_rates(k1: u64, n1: u64, k0: u64, n0: u64) -> Result<RatioEstimate> {
    if n1 == 0 || n0 == 0 {
        return Err(invalid("ratio of rates needs nonzero denominators"));
    }
    let p1 = k1 as f64 / n1 as f64;
    if k0 == 0 {
        let upper = 1.0 - 0.05f64.powf(1.0 / n0 as f64);
        return Ok(RatioEstimate {
            ratio: p1 / upper,
            se: 0.0,
            kind: RatioKind::LowerBound,
        });
    }
    let p0 = k0 as f64 / n0 as f64;
    let ratio = p1 / p0;
    let rel1 = if k1 == 0 {
        0.0
    } else {
        (1.0 - p1) / (p1 * n1 as f64)
    };
    let rel0 = (1.0 - p0) / (p0 * n0 as f64);
    Ok(RatioEstimate {
        ratio,
        se: ratio * (rel1 + rel0).sqrt(),
        kind: RatioKind::Estimate,
    })
}

/// True:false rejection ratio at size `t`:
/// `P_1[reject, analyzed, T >= t] / P_0[reject, analyzed, T >= t]`.
///
/// Both probabilities are per series started, so the ratio is a ratio of
/// rejection counts at `t` scaled by the series totals. This is the form
/// for which rejecting at `LR >= gamma` guarantees a ratio of at least
/// `gamma` for every policy.
pub fn true_false_rejection_ratio(
    tally_h1: &ErrorTally,
    tally_h0: &ErrorTally,
    t: u32,
) -> Result<RatioEstimate> {
    let c1 = tally_h1.at(t);
    let c0 = tally_h0.at(t);
    ratio_of_rates(
        c1.rejections,
        tally_h1.series_total,
        c0.rejections,
        tally_h0.series_total,
    )
}

/// Ratio of the rejection rates among analyses performed at size `t`
/// under H1 and H0. Reported for diagnostics; unlike
/// [`true_false_rejection_ratio`] it carries no guarantee when the policy
/// depends on the data.
pub fn conditional_rejection_ratio(
    tally_h1: &ErrorTally,
    tally_h0: &ErrorTally,
    t: u32,
) -> Result<RatioEstimate> {
    let c1 = tally_h1.at(t);
    let c0 = tally_h0.at(t);
    if c1.analyses == 0 || c0.analyses == 0 {
        let bad = if c1.analyses == 0 { c1 } else { c0 };
        return Err(Error::UndefinedRate {
            t,
            series_reaching: bad.series_reaching,
        });
    }
    ratio_of_rates(c1.rejections, c1.analyses, c0.rejections, c0.analyses)
}
