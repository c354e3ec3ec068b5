//! Run configuration: a TOML file with `[policy]`, `[sim]`, `[rule]` and
//! `[output]` sections. Every key has a default and unknown keys are
//! rejected.

use std::path::Path;

use accbias_core::{
    Alternative, AnalysisSchedule, DecisionRule, GoldRushParams, Policy, PowerLawParams, SimConfig,
    TimingWindowParams,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const POLICY_NAMES: [&str; 5] = [
    "gold_rush",
    "power_law",
    "lsr",
    "timing_window",
    "independent",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySection {
    pub name: String,
    pub alpha: f64,
    pub omega_s1: f64,
    pub omega_x1: f64,
    pub omega_ns1: f64,
    pub omega_s: f64,
    pub omega_x: f64,
    pub omega_ns: f64,
    /// Single analysis size for gold_rush and power_law; absent means an
    /// analysis after every study.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analyze_at: Option<u32>,
    pub power_delta_h1: f64,
    pub power_tau: f64,
    pub window_a: u32,
    pub window_b: u32,
    pub window_delta_h1: f64,
    pub window_continue_prob: f64,
    pub independent_continue_prob: f64,
    pub independent_analyze_at: u32,
    /// Policies swept by `bound-suite`.
    pub suite: Vec<String>,
}

impl Default for PolicySection {
    fn default() -> Self {
        let g = GoldRushParams::default();
        Self {
            name: "gold_rush".into(),
            alpha: g.alpha,
            omega_s1: g.omega_s1,
            omega_x1: g.omega_x1,
            omega_ns1: g.omega_ns1,
            omega_s: g.omega_s,
            omega_x: g.omega_x,
            omega_ns: g.omega_ns,
            analyze_at: None,
            power_delta_h1: 0.2,
            power_tau: 2.0,
            window_a: 1,
            window_b: 3,
            window_delta_h1: 0.2,
            window_continue_prob: 0.8,
            independent_continue_prob: 1.0,
            independent_analyze_at: 3,
            suite: POLICY_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl PolicySection {
    pub fn gold_rush_params(&self) -> GoldRushParams {
        GoldRushParams {
            omega_s1: self.omega_s1,
            omega_x1: self.omega_x1,
            omega_ns1: self.omega_ns1,
            omega_s: self.omega_s,
            omega_x: self.omega_x,
            omega_ns: self.omega_ns,
            alpha: self.alpha,
        }
    }

    fn schedule(&self) -> AnalysisSchedule {
        match self.analyze_at {
            Some(k) => AnalysisSchedule::AtSize(k),
            None => AnalysisSchedule::EveryStudy,
        }
    }

    pub fn build(&self, name: &str) -> Result<Policy, CliError> {
        let policy = match name {
            "gold_rush" => Policy::gold_rush(self.gold_rush_params(), self.schedule()),
            "power_law" => Policy::power_law(
                PowerLawParams {
                    delta_h1: self.power_delta_h1,
                    tau: self.power_tau,
                },
                self.schedule(),
            ),
            "lsr" => Policy::lsr(self.alpha),
            "timing_window" => Policy::timing_window(
                TimingWindowParams {
                    a: self.window_a,
                    b: self.window_b,
                    delta_h1: self.window_delta_h1,
                },
                self.window_continue_prob,
            ),
            "independent" => Policy::independent(
                self.independent_continue_prob,
                AnalysisSchedule::AtSize(self.independent_analyze_at),
            ),
            other => {
                return Err(CliError::Config(format!(
                    "unknown policy {other:?}; expected one of {POLICY_NAMES:?}"
                )))
            }
        };
        policy.map_err(|e| CliError::Config(format!("policy {name}: {e}")))
    }

    pub fn selected(&self) -> Result<Policy, CliError> {
        self.build(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub replications: u64,
    pub seed: u64,
    pub t_cap: u32,
    pub hypothesis_mean: f64,
    pub equal_n: u32,
    pub sigma_d: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<u32>>,
    pub table1_t_max: u32,
    pub table2_t_max: u32,
    pub bootstrap_resamples: u32,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            replications: 10_000_000,
            seed: 1,
            t_cap: 100,
            hypothesis_mean: 0.0,
            equal_n: 50,
            sigma_d: 1.0,
            sizes: None,
            table1_t_max: 6,
            table2_t_max: 5,
            bootstrap_resamples: 1000,
        }
    }
}

impl SimSection {
    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let cfg = SimConfig {
            replications: self.replications,
            seed: self.seed,
            t_cap: self.t_cap,
            hypothesis_mean: self.hypothesis_mean,
            equal_n: self.equal_n,
            sigma_d: self.sigma_d,
            sizes: self.sizes.clone(),
        };
        cfg.validate()
            .map_err(|e| CliError::Config(format!("sim: {e}")))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleSection {
    /// `z_test`, `lr_threshold` or `posterior_odds`.
    pub kind: String,
    pub alpha: f64,
    pub gamma: f64,
    pub pi: f64,
    /// Per-study Z mean of the alternative.
    pub delta: f64,
    pub symmetric: bool,
}

impl Default for RuleSection {
    fn default() -> Self {
        Self {
            kind: "z_test".into(),
            alpha: 0.05,
            gamma: 16.0,
            pi: 0.5,
            delta: 1.0,
            symmetric: false,
        }
    }
}

impl RuleSection {
    pub fn alternative(&self) -> Result<Alternative, CliError> {
        let alt = if self.symmetric {
            Alternative::symmetric(self.delta)
        } else {
            Alternative::simple(self.delta)
        };
        alt.map_err(|e| CliError::Config(format!("rule: {e}")))
    }

    pub fn build(&self, kind: &str) -> Result<DecisionRule, CliError> {
        let rule = match kind {
            "z_test" => DecisionRule::z_test(self.alpha),
            "lr_threshold" => DecisionRule::lr_threshold(self.alpha, self.alternative()?),
            "posterior_odds" => {
                DecisionRule::posterior_odds(self.gamma, self.pi, self.alternative()?)
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown rule {other:?}; expected z_test, lr_threshold or posterior_odds"
                )))
            }
        };
        rule.map_err(|e| CliError::Config(format!("rule: {e}")))
    }

    pub fn selected(&self) -> Result<DecisionRule, CliError> {
        self.build(&self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub policy: PolicySection,
    pub sim: SimSection,
    pub rule: RuleSection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Validates every referenced parameter.
    pub fn check(&self) -> Result<(), CliError> {
        self.policy.selected()?;
        for name in &self.policy.suite {
            self.policy.build(name)?;
        }
        self.sim.sim_config()?;
        // Every rule parameter must be valid, not only those of the selected kind.
        self.rule.selected()?;
        for kind in ["z_test", "lr_threshold", "posterior_odds"] {
            self.rule.build(kind)?;
        }
        if self.sim.table1_t_max == 0 || self.sim.table2_t_max == 0 {
            return Err(CliError::Config("table t_max must be at least 1".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn round_trip_is_identity() {
        let text = r#"
            [policy]
            name = "power_law"
            analyze_at = 4
            power_tau = 1.5
            suite = ["lsr", "independent"]

            [sim]
            replications = 1234
            seed = 99
            sizes = [10, 20]

            [rule]
            kind = "posterior_odds"
            gamma = 8.0
            symmetric = true
        "#;
        let a = RunConfig::parse(text).unwrap();
        let b = RunConfig::parse(&a.to_toml()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.sim.sizes, Some(vec![10, 20]));
        assert_eq!(
            RunConfig::parse(&RunConfig::default().to_toml()).unwrap(),
            RunConfig::default()
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            RunConfig::parse("[sim]\nreplicatons = 5\n"),
            Err(CliError::Config(_))
        ));
        assert!(RunConfig::parse("[extra]\nx = 1\n").is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(RunConfig::parse("[policy]\nname = \"nope\"\n").is_err());
        assert!(RunConfig::parse("[policy]\nomega_ns = 1.5\n").is_err());
        assert!(RunConfig::parse("[sim]\nreplications = 0\n").is_err());
        assert!(RunConfig::parse("[rule]\npi = 1.0\n").is_err());
        assert!(RunConfig::parse("[policy]\nsuite = [\"gold_rush\", \"bogus\"]\n").is_err());
    }

    #[test]
    fn every_policy_builds_from_defaults() {
        let p = PolicySection::default();
        for name in POLICY_NAMES {
            assert_eq!(p.build(name).unwrap().name(), name);
        }
    }
}
