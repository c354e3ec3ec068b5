//! Closed-form bias quantities for the Gold Rush scenario under the null.
//!
//! Gold Rush continuation depends on a study only through its category
//! (significant positive, nonsignificant, significant negative), so
//! everything here reduces to truncated standard normal moments weighted
//! by category masses and new-study probabilities.

use crate::error::{invalid, Error, Result};
use crate::normal;
use crate::policy::{GoldRushParams, StudyCategory};

/// Standard normal restricted to `[lower, upper]` (either end may be infinite).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedStandardNormal {
    pub lower: f64,
    pub upper: f64,
}

impl TruncatedStandardNormal {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) {
            return Err(invalid(format!(
                "empty truncation interval [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// Support of a study category at critical value `c`.
    pub fn for_category(category: StudyCategory, critical: f64) -> Self {
        match category {
            StudyCategory::SignificantPositive => Self {
                lower: critical,
                upper: f64::INFINITY,
            },
            StudyCategory::NonSignificant => Self {
                lower: -critical,
                upper: critical,
            },
            StudyCategory::SignificantNegative => Self {
                lower: f64::NEG_INFINITY,
                upper: -critical,
            },
        }
    }

    pub fn mass(&self) -> f64 {
        if self.lower >= 0.0 {
            normal::sf(self.lower) - normal::sf(self.upper)
        } else {
            normal::cdf(self.upper) - normal::cdf(self.lower)
        }
    }

    fn pdf_end(x: f64) -> f64 {
        if x.is_infinite() {
            0.0
        } else {
            normal::pdf(x)
        }
    }

    fn x_pdf_end(x: f64) -> f64 {
        if x.is_infinite() {
            0.0
        } else {
            x * normal::pdf(x)
        }
    }

    pub fn mean(&self) -> f64 {
        (Self::pdf_end(self.lower) - Self::pdf_end(self.upper)) / self.mass()
    }

    pub fn second_moment(&self) -> f64 {
        1.0 + (Self::x_pdf_end(self.lower) - Self::x_pdf_end(self.upper)) / self.mass()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.second_moment() - m * m
    }
}

/// `E[Z | Z >= c]` for a standard normal Z.
pub fn tail_expectation(c: f64) -> f64 {
    normal::pdf(c) / normal::sf(c)
}

/// `E0[Z_t | T >= t+1]` for a study whose continuation probabilities by
/// category are `(omega_s, omega_x, omega_ns)`.
pub fn expected_given_continuation(
    omega_s: f64,
    omega_x: f64,
    omega_ns: f64,
    alpha: f64,
) -> Result<f64> {
    let c = normal::two_sided_critical(alpha);
    let half = 0.5 * alpha;
    let denom = (omega_s + omega_x) * half + omega_ns * (1.0 - alpha);
    if !(denom > 0.0) {
        return Err(Error::DegeneratePolicy(
            "no category leads to a new study".into(),
        ));
    }
    // Tail means are +-phi(c)/(alpha/2); the symmetric middle has mean 0.
    let tail = normal::pdf(c);
    Ok(tail * (omega_s - omega_x) / denom)
}

/// `E0[Z_1 | T >= 2]`.
pub fn expected_pilot_given_next(params: &GoldRushParams) -> Result<f64> {
    expected_given_continuation(
        params.omega_s1,
        params.omega_x1,
        params.omega_ns1,
        params.alpha,
    )
}

/// `E0[Z_t | T >= t+1]` for `t >= 2`.
pub fn expected_mid_given_next(params: &GoldRushParams) -> Result<f64> {
    expected_given_continuation(
        params.omega_s,
        params.omega_x,
        params.omega_ns,
        params.alpha,
    )
}

/// `E0[Z_t | T >= t+1]` at any `t >= 1`.
pub fn expected_study_given_next(t: u32, params: &GoldRushParams) -> Result<f64> {
    if t <= 1 {
        expected_pilot_given_next(params)
    } else {
        expected_mid_given_next(params)
    }
}

/// `E0[Z^(t) | T >= t]` for equal study sizes: the pilot and middle
/// studies carry their selection bias, the last study is unbiased.
pub fn expected_meta_z(t: u32, params: &GoldRushParams) -> Result<f64> {
    if t < 2 {
        return Ok(0.0);
    }
    let pilot = expected_pilot_given_next(params)?;
    let mid = if t > 2 {
        expected_mid_given_next(params)?
    } else {
        0.0
    };
    // The last study is unbiased and adds nothing to the numerator.
    Ok((pilot + mid * f64::from(t - 2)) / f64::from(t).sqrt())
}

/// Unequal-size version of [`expected_meta_z`]; `sizes[i]` is the per-arm
/// size of study `i + 1` and `t = sizes.len()`.
pub fn expected_meta_z_weighted(sizes: &[u32], params: &GoldRushParams) -> Result<f64> {
    if sizes.contains(&0) {
        return Err(invalid("study sizes must be positive"));
    }
    let t = sizes.len();
    if t < 2 {
        return Ok(0.0);
    }
    let pilot = expected_pilot_given_next(params)?;
    let mid = expected_mid_given_next(params)?;
    let total: f64 = sizes.iter().map(|&n| f64::from(n)).sum();
    let mut num = f64::from(sizes[0]).sqrt() * pilot;
    for &n in &sizes[1..t - 1] {
        num += f64::from(n).sqrt() * mid;
    }
    Ok(num / total.sqrt())
}

/// `A0bar(t)`: null probability that a Gold Rush series reaches `t` studies.
pub fn abar0(t: u32, params: &GoldRushParams) -> f64 {
    (1..t).map(|i| params.null_continuation(i)).product()
}

/// Two-sided type-I rate of a standard normal test when the statistic is
/// shifted by its bias `E0[Z^(t) | T >= t]` but otherwise standard normal.
pub fn bias_only_type1(t: u32, params: &GoldRushParams) -> Result<f64> {
    let e = expected_meta_z(t, params)?;
    Ok(shifted_normal_type1(e, params.alpha))
}

/// `P[|X| >= z_{alpha/2}]` for `X ~ N(shift, 1)`.
pub fn shifted_normal_type1(shift: f64, alpha: f64) -> f64 {
    let c = normal::two_sided_critical(alpha);
    normal::sf(c - shift) + normal::cdf(-c - shift)
}

/// Long-run share of significant studies among continuing non-pilot studies.
pub fn long_run_significant_fraction(params: &GoldRushParams) -> f64 {
    let half = 0.5 * params.alpha;
    let s = half * params.omega_s;
    s / (s + half * params.omega_x + (1.0 - params.alpha) * params.omega_ns)
}

/// Precomputed Gold Rush bias summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldRushAnalytics {
    pub alpha: f64,
    pub params: GoldRushParams,
    pub e_pilot_given_next: f64,
    pub e_mid_given_next: f64,
}

impl GoldRushAnalytics {
    pub fn new(params: GoldRushParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            alpha: params.alpha,
            params,
            e_pilot_given_next: expected_pilot_given_next(&params)?,
            e_mid_given_next: expected_mid_given_next(&params)?,
        })
    }
}

/// Mixture variance and the weight-averaged component variance.
///
/// Weights are normalized internally.
pub fn mixture_variance_decomposition(
    component_means: &[f64],
    component_vars: &[f64],
    weights: &[f64],
) -> Result<(f64, f64)> {
    if component_means.len() != component_vars.len() || component_means.len() != weights.len() {
        return Err(invalid(
            "means, variances and weights must have equal length",
        ));
    }
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(invalid("weights must be nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(invalid("weights sum to zero"));
    }
    let mut mean = 0.0;
    let mut second = 0.0;
    let mut avg_var = 0.0;
    for ((&m, &v), &w) in component_means.iter().zip(component_vars).zip(weights) {
        let w = w / total;
        mean += w * m;
        second += w * (v + m * m);
        avg_var += w * v;
    }
    Ok((second - mean * mean, avg_var))
}

/// Upper bound on enumerated sequences before [`enumerate_categories`]
/// refuses with a resource error.
pub const MAX_ENUMERATED_SEQUENCES: u64 = 4_000_000;
/// Largest supported enumeration horizon.
pub const MAX_ENUMERATION_HORIZON: u32 = 20;

/// A category sequence `c_1..c_t` packed base 3 (first study in the
/// lowest digit) with its null probability `P0[T >= t, c_1..c_t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategorySequence {
    code: u64,
    len: u8,
    pub mass: f64,
}

fn category_digit(c: StudyCategory) -> u64 {
    match c {
        StudyCategory::SignificantPositive => 0,
        StudyCategory::NonSignificant => 1,
        StudyCategory::SignificantNegative => 2,
    }
}

fn digit_category(d: u64) -> StudyCategory {
    match d {
        0 => StudyCategory::SignificantPositive,
        1 => StudyCategory::NonSignificant,
        _ => StudyCategory::SignificantNegative,
    }
}

impl CategorySequence {
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn category(&self, i: usize) -> StudyCategory {
        assert!(i < self.len());
        digit_category(self.code / 3u64.pow(i as u32) % 3)
    }

    pub fn categories(&self) -> Vec<StudyCategory> {
        (0..self.len()).map(|i| self.category(i)).collect()
    }
}

/// One component of the null mixture for `Z^(t) | T >= t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    /// Unnormalized weight `P0[T >= t, c_1..c_{t-1}]`.
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Exact null distribution of Gold Rush category sequences.
#[derive(Debug, Clone)]
pub struct CategoryEnumeration {
    params: GoldRushParams,
    critical: f64,
    /// `by_len[t - 1]` holds the length-`t` sequences with nonzero mass.
    by_len: Vec<Vec<CategorySequence>>,
}

/// Enumerates every category sequence up to length `t_max` with its exact
/// null probability including the survival factors. Zero-mass branches
/// are pruned.
pub fn enumerate_categories(t_max: u32, params: &GoldRushParams) -> Result<CategoryEnumeration> {
    params.validate()?;
    if t_max == 0 {
        return Err(invalid("t_max must be at least 1"));
    }
    if t_max > MAX_ENUMERATION_HORIZON {
        return Err(Error::Resource(format!(
            "enumeration horizon {t_max} exceeds {MAX_ENUMERATION_HORIZON}"
        )));
    }
    let alpha = params.alpha;
    let mut by_len: Vec<Vec<CategorySequence>> = Vec::with_capacity(t_max as usize);
    let mut total: u64 = 0;
    let root = StudyCategory::ALL
        .iter()
        .map(|&c| CategorySequence {
            code: category_digit(c),
            len: 1,
            mass: c.null_mass(alpha),
        })
        .collect::<Vec<_>>();
    total += root.len() as u64;
    by_len.push(root);
    for t in 2..=t_max {
        let prev = &by_len[t as usize - 2];
        total += 3 * prev.len() as u64;
        if total > MAX_ENUMERATED_SEQUENCES {
            return Err(Error::Resource(format!(
                "more than {MAX_ENUMERATED_SEQUENCES} category sequences up to t = {t_max}"
            )));
        }
        let place = 3u64.pow(t - 1);
        let mut next = Vec::with_capacity(3 * prev.len());
        for seq in prev {
            let last = seq.category(seq.len() - 1);
            let survive = seq.mass * params.omega(t - 1, last);
            if survive == 0.0 {
                continue;
            }
            for &c in &StudyCategory::ALL {
                next.push(CategorySequence {
                    code: seq.code + category_digit(c) * place,
                    len: t as u8,
                    mass: survive * c.null_mass(alpha),
                });
            }
        }
        by_len.push(next);
    }
    Ok(CategoryEnumeration {
        params: *params,
        critical: normal::two_sided_critical(alpha),
        by_len,
    })
}

impl CategoryEnumeration {
    pub fn t_max(&self) -> u32 {
        self.by_len.len() as u32
    }

    pub fn sequences(&self, t: u32) -> &[CategorySequence] {
        &self.by_len[t as usize - 1]
    }

    /// `P0[T >= t]`; equals [`abar0`].
    pub fn surviving_mass(&self, t: u32) -> f64 {
        self.sequences(t).iter().map(|s| s.mass).sum()
    }

    pub fn category_distribution(&self, category: StudyCategory) -> TruncatedStandardNormal {
        TruncatedStandardNormal::for_category(category, self.critical)
    }

    /// Mixture components of `Z^(t) | T >= t` under equal study sizes, one
    /// per category prefix `c_1..c_{t-1}`. The last study is unconditioned.
    pub fn meta_z_mixture(&self, t: u32) -> Vec<MixtureComponent> {
        assert!(t >= 1 && t <= self.t_max());
        if t == 1 {
            return vec![MixtureComponent {
                weight: 1.0,
                mean: 0.0,
                variance: 1.0,
            }];
        }
        let moments: Vec<(f64, f64)> = StudyCategory::ALL
            .iter()
            .map(|&c| {
                let d = self.category_distribution(c);
                (d.mean(), d.variance())
            })
            .collect();
        let sqrt_t = f64::from(t).sqrt();
        self.sequences(t - 1)
            .iter()
            .filter_map(|prefix| {
                let last = prefix.category(prefix.len() - 1);
                let weight = prefix.mass * self.params.omega(t - 1, last);
                if weight == 0.0 {
                    return None;
                }
                let (mut m, mut v) = (0.0, 1.0);
                for i in 0..prefix.len() {
                    let (cm, cv) = moments[category_digit(prefix.category(i)) as usize];
                    m += cm;
                    v += cv;
                }
                Some(MixtureComponent {
                    weight,
                    mean: m / sqrt_t,
                    variance: v / f64::from(t),
                })
            })
            .collect()
    }

    /// Mean of `Z^(t) | T >= t` from the mixture.
    pub fn meta_z_mean(&self, t: u32) -> f64 {
        let comps = self.meta_z_mixture(t);
        let w: f64 = comps.iter().map(|c| c.weight).sum();
        comps.iter().map(|c| c.weight * c.mean).sum::<f64>() / w
    }

    /// `(mixture variance, average component variance)` of `Z^(t) | T >= t`.
    pub fn meta_z_variance(&self, t: u32) -> Result<(f64, f64)> {
        let comps = self.meta_z_mixture(t);
        let means: Vec<f64> = comps.iter().map(|c| c.mean).collect();
        let vars: Vec<f64> = comps.iter().map(|c| c.variance).collect();
        let weights: Vec<f64> = comps.iter().map(|c| c.weight).collect();
        mixture_variance_decomposition(&means, &vars, &weights)
    }
}
