//! Common-effect (fixed-effect) meta-analysis arithmetic.
//!
//! Every study shares a known outcome standard deviation `sigma_d`, so a
//! study's inverse-variance weight is proportional to its per-arm sample
//! size and the combined Z-score is the `sqrt(n)`-weighted average of the
//! study Z-scores.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// One study: its Z-score, per-arm sample size and mean difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyOutcome {
    pub z: f64,
    pub n: u32,
    pub mean_diff: f64,
    pub sigma_d: f64,
}

impl StudyOutcome {
    /// Builds a study from its Z-score; the mean difference follows from
    /// `z * sigma_d / sqrt(n)`.
    pub fn from_z(z: f64, n: u32, sigma_d: f64) -> Result<Self> {
        Self::check_design(n, sigma_d)?;
        Ok(Self {
            z,
            n,
            mean_diff: z * sigma_d / f64::from(n).sqrt(),
            sigma_d,
        })
    }

    /// Builds a study from its mean difference on the original scale.
    pub fn from_mean_diff(mean_diff: f64, n: u32, sigma_d: f64) -> Result<Self> {
        Self::check_design(n, sigma_d)?;
        Ok(Self {
            z: mean_diff * f64::from(n).sqrt() / sigma_d,
            n,
            mean_diff,
            sigma_d,
        })
    }

    fn check_design(n: u32, sigma_d: f64) -> Result<()> {
        if n == 0 {
            return Err(invalid("per-arm sample size must be at least 1"));
        }
        if !(sigma_d.is_finite() && sigma_d > 0.0) {
            return Err(invalid(format!("sigma_d must be positive, got {sigma_d}")));
        }
        Ok(())
    }

    /// Standard error of the mean difference, `sigma_d / sqrt(n)`.
    pub fn se(&self) -> f64 {
        self.sigma_d / f64::from(self.n).sqrt()
    }

    /// Inverse-variance weight `1 / se^2`.
    pub fn weight(&self) -> f64 {
        let se = self.se();
        1.0 / (se * se)
    }
}

/// Cumulative synthesis of the first `t` studies of a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetaState {
    pub t: u32,
    pub combined_z: f64,
    pub combined_estimate: f64,
    pub combined_se: f64,
    pub total_n: u64,
    /// Running sum of study Z-scores. The likelihood ratio of any
    /// alternative in [`crate::inference`] is a function of this and `t`.
    pub sum_z: f64,
}

fn check_studies(studies: &[StudyOutcome]) -> Result<f64> {
    let first = studies
        .first()
        .ok_or_else(|| invalid("cannot combine an empty list of studies"))?;
    let sigma = first.sigma_d;
    if let Some(bad) = studies.iter().find(|s| s.sigma_d != sigma) {
        return Err(Error::ModelViolation(format!(
            "studies must share sigma_d: found {} and {}",
            sigma, bad.sigma_d
        )));
    }
    Ok(sigma)
}

/// Combined Z-score `sum(sqrt(n_i) z_i) / sqrt(N)`.
pub fn combine_z(studies: &[StudyOutcome]) -> Result<f64> {
    check_studies(studies)?;
    let total_n: f64 = studies.iter().map(|s| f64::from(s.n)).sum();
    let weighted: f64 = studies.iter().map(|s| f64::from(s.n).sqrt() * s.z).sum();
    Ok(weighted / total_n.sqrt())
}

/// Inverse-variance weighted estimate, its standard error and Z-score.
pub fn combine_estimate(studies: &[StudyOutcome]) -> Result<MetaState> {
    check_studies(studies)?;
    let mut acc = MetaAccumulator::new();
    for s in studies {
        acc.push(s);
    }
    Ok(acc.state())
}

/// Incremental version of [`combine_estimate`] used by the simulator.
#[derive(Debug, Clone, Default)]
pub struct MetaAccumulator {
    t: u32,
    sum_w: f64,
    sum_wd: f64,
    sum_sqrt_n_z: f64,
    total_n: u64,
    sum_z: f64,
}

impl MetaAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    pub fn push(&mut self, s: &StudyOutcome) {
        let w = s.weight();
        self.t += 1;
        self.sum_w += w;
        self.sum_wd += w * s.mean_diff;
        self.sum_sqrt_n_z += f64::from(s.n).sqrt() * s.z;
        self.total_n += u64::from(s.n);
        self.sum_z += s.z;
    }

    pub fn len(&self) -> u32 {
        self.t
    }

    pub fn is_empty(&self) -> bool {
        self.t == 0
    }

    /// Snapshot of the synthesis so far. Panics on an empty accumulator.
    pub fn state(&self) -> MetaState {
        assert!(self.t > 0, "no studies pushed");
        let estimate = self.sum_wd / self.sum_w;
        let se = self.sum_w.recip().sqrt();
        MetaState {
            t: self.t,
            // The sqrt(n)-weighted Z route is exact for equal sigma_d and
            // avoids the rounding of estimate / se.
            combined_z: self.sum_sqrt_n_z / (self.total_n as f64).sqrt(),
            combined_estimate: estimate,
            combined_se: se,
            total_n: self.total_n,
            sum_z: self.sum_z,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn study(z: f64, n: u32) -> StudyOutcome {
        StudyOutcome::from_z(z, n, 1.0).unwrap()
    }

    #[test]
    fn single_study_identity() {
        assert_eq!(combine_z(&[study(1.7, 50)]).unwrap(), 1.7);
    }

    #[test]
    fn four_equal_studies() {
        let s = vec![study(1.0, 10); 4];
        assert!((combine_z(&s).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn unequal_sizes() {
        let z = combine_z(&[study(1.0, 4), study(2.0, 1)]).unwrap();
        assert!((z - 4.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((z - 1.788_854_381_999_831_8).abs() < 1e-12);
    }

    #[test]
    fn estimate_single_study() {
        let s = StudyOutcome::from_mean_diff(0.5, 16, 1.0).unwrap();
        let m = combine_estimate(&[s]).unwrap();
        assert!((m.combined_estimate - 0.5).abs() < 1e-15);
        assert!((m.combined_se - 0.25).abs() < 1e-15);
        assert!((m.combined_z - 2.0).abs() < 1e-14);
        assert_eq!(m.total_n, 16);
    }

    #[test]
    fn estimate_two_identical_studies() {
        let s = StudyOutcome::from_mean_diff(0.5, 16, 1.0).unwrap();
        let m = combine_estimate(&[s, s]).unwrap();
        assert!((m.combined_estimate - 0.5).abs() < 1e-15);
        assert!((m.combined_se - 1.0 / 32f64.sqrt()).abs() < 1e-15);
        assert!((m.combined_z - 2.828_427_124_746_19).abs() < 1e-12);
    }

    #[test]
    fn estimate_hand_evaluated_weights() {
        // W_i = n_i for sigma_d = 1: M = (1*1 + 3*0) / 4, SE = 1/2.
        let a = StudyOutcome::from_mean_diff(1.0, 1, 1.0).unwrap();
        let b = StudyOutcome::from_mean_diff(0.0, 3, 1.0).unwrap();
        let m = combine_estimate(&[a, b]).unwrap();
        assert!((m.combined_estimate - 0.25).abs() < 1e-15);
        assert!((m.combined_se - 0.5).abs() < 1e-15);
        assert!((m.combined_z - 0.5).abs() < 1e-15);
        assert!((combine_z(&[a, b]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_and_mismatched_inputs_are_rejected() {
        assert!(matches!(combine_z(&[]), Err(Error::InvalidInput(_))));
        let a = StudyOutcome::from_z(1.0, 4, 1.0).unwrap();
        let b = StudyOutcome::from_z(1.0, 4, 2.0).unwrap();
        assert!(matches!(combine_z(&[a, b]), Err(Error::ModelViolation(_))));
        assert!(matches!(
            combine_estimate(&[a, b]),
            Err(Error::ModelViolation(_))
        ));
        assert!(StudyOutcome::from_z(1.0, 0, 1.0).is_err());
        assert!(StudyOutcome::from_z(1.0, 3, 0.0).is_err());
    }

    fn studies_strategy() -> impl Strategy<Value = Vec<StudyOutcome>> {
        (0.1f64..5.0).prop_flat_map(|sigma| {
            prop::collection::vec((-6.0f64..6.0, 1u32..500), 1..20).prop_map(move |v| {
                v.into_iter()
                    .map(|(z, n)| StudyOutcome::from_z(z, n, sigma).unwrap())
                    .collect()
            })
        })
    }

    proptest! {
        #[test]
        fn scale_consistency(studies in studies_strategy()) {
            let z = combine_z(&studies).unwrap();
            let m = combine_estimate(&studies).unwrap();
            prop_assert!((m.combined_z - z).abs() <= 1e-10 * z.abs().max(1.0));
            let ratio = m.combined_estimate / m.combined_se;
            prop_assert!((ratio - m.combined_z).abs() <= 1e-10 * ratio.abs().max(1.0));
            prop_assert_eq!(m.total_n, studies.iter().map(|s| u64::from(s.n)).sum::<u64>());
        }

        #[test]
        fn study_scales_agree(z in -8.0f64..8.0, n in 1u32..10_000, sigma in 0.01f64..10.0) {
            let s = StudyOutcome::from_z(z, n, sigma).unwrap();
            let back = s.mean_diff / (sigma / f64::from(n).sqrt());
            prop_assert!((back - z).abs() <= 1e-12 * z.abs().max(1.0));
        }

        #[test]
        fn permutation_invariance(studies in studies_strategy(), seed in any::<u64>()) {
            let mut shuffled = studies.clone();
            // deterministic Fisher-Yates driven by the seed
            let mut state = seed;
            for i in (1..shuffled.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
            let a = combine_z(&studies).unwrap();
            let b = combine_z(&shuffled).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }

        #[test]
        fn equal_n_reduction(zs in prop::collection::vec(-6.0f64..6.0, 1..30), n in 1u32..1000) {
            let studies: Vec<_> = zs.iter().map(|&z| study(z, n)).collect();
            let expect = zs.iter().sum::<f64>() / (zs.len() as f64).sqrt();
            prop_assert!((combine_z(&studies).unwrap() - expect).abs() < 1e-12);
        }
    }
}
