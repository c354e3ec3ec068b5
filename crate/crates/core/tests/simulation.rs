use accbias_core::analytics::{enumerate_categories, expected_meta_z};
use accbias_core::engine::{conditional_rate, fold_replications, surviving_rate};
use accbias_core::policy::StudyCategory;
use accbias_core::{
    run_experiment, AnalysisSchedule, DecisionRule, ExperimentOptions, GoldRushParams, Policy,
    SimConfig,
};

fn gold_rush() -> Policy {
    Policy::gold_rush(GoldRushParams::default(), AnalysisSchedule::EveryStudy).unwrap()
}

fn config(reps: u64, seed: u64) -> SimConfig {
    SimConfig {
        replications: reps,
        seed,
        ..SimConfig::default()
    }
}

#[test]
fn independent_baseline_is_standard_normal() {
    let policy = Policy::independent(0.8, AnalysisSchedule::AtSize(3)).unwrap();
    let opts = ExperimentOptions {
        histogram_times: vec![1, 3, 5],
        ..ExperimentOptions::default()
    };
    let res = run_experiment(
        &policy,
        &config(200_000, 4),
        &DecisionRule::z_test(0.05).unwrap(),
        &opts,
    )
    .unwrap();
    for (t, m) in &res.moments {
        let n = m.n as f64;
        assert!(
            m.mean().abs() < 3.0 * m.se_mean(),
            "t={t} mean {}",
            m.mean()
        );
        // sd of the sample variance of normals is sqrt(2/(n-1))
        assert!(
            (m.variance() - 1.0).abs() < 4.0 * (2.0 / (n - 1.0)).sqrt(),
            "t={t}"
        );
        assert!(m.skewness().abs() < 4.0 * (6.0 / n).sqrt(), "t={t}");
    }
    let r = conditional_rate(&res.tally, 3).unwrap();
    assert!((r.rate - 0.05).abs() < 3.0 * r.se, "{r:?}");
}

#[test]
fn gold_rush_third_meta_analysis_mean() {
    let opts = ExperimentOptions {
        histogram_times: vec![3],
        ..ExperimentOptions::default()
    };
    let res = run_experiment(
        &gold_rush(),
        &config(2_000_000, 17),
        &DecisionRule::z_test(0.05).unwrap(),
        &opts,
    )
    .unwrap();
    let m = res.moments[&3];
    let expect = expected_meta_z(3, &GoldRushParams::default()).unwrap();
    assert!((expect - 1.048).abs() < 1e-3);
    assert!(
        (m.mean() - expect).abs() < 3.0 * m.se_mean(),
        "{} vs {expect}",
        m.mean()
    );
}

#[test]
fn gold_rush_second_meta_analysis_is_overdispersed() {
    let params = GoldRushParams::default();
    let crit = accbias_core::normal::two_sided_critical(params.alpha);
    let mix = enumerate_categories(2, &params).unwrap().meta_z_mixture(2);
    let total: f64 = mix.iter().map(|c| c.weight).sum();
    let avg_component_var: f64 = mix.iter().map(|c| c.weight * c.variance).sum::<f64>() / total;
    // Empirical Var(Z^(2)) plus the per-category split of the same series.
    let (moments, by_cat) = fold_replications(
        &gold_rush(),
        &config(1_000_000, 5),
        None,
        || (accbias_core::stats::Moments::default(), [0u64; 3]),
        |acc, traj| {
            if traj.t_realized >= 2 {
                acc.0.push(traj.meta_states[1].combined_z);
                let c = StudyCategory::of(traj.outcomes[0].z, crit);
                let k = StudyCategory::ALL.iter().position(|&x| x == c).unwrap();
                acc.1[k] += 1;
            }
        },
        |a, b| {
            a.0.merge(&b.0);
            for k in 0..3 {
                a.1[k] += b.1[k];
            }
        },
    )
    .unwrap();
    let var = moments.variance();
    assert!(
        var > avg_component_var + 0.1,
        "{var} vs {avg_component_var}"
    );
    assert!(mix.iter().all(|c| var > c.variance));
    // The realized pilot categories follow the enumeration weights.
    let n = moments.n as f64;
    for (k, &count) in by_cat.iter().enumerate() {
        let cat = StudyCategory::ALL[k];
        let w: f64 = enumerate_categories(2, &params)
            .unwrap()
            .sequences(2)
            .iter()
            .filter(|s| s.category(0) == cat)
            .map(|s| s.mass)
            .sum::<f64>()
            / total;
        let se = (w * (1.0 - w) / n).sqrt();
        assert!((count as f64 / n - w).abs() < 4.0 * se + 1e-12, "{cat:?}");
    }
}

#[test]
fn lr_rule_survives_under_gold_rush() {
    let rule =
        DecisionRule::lr_threshold(0.05, accbias_core::Alternative::simple(1.0).unwrap()).unwrap();
    let r = 200_000u64;
    let res = run_experiment(
        &gold_rush(),
        &config(r, 8),
        &rule,
        &ExperimentOptions::default(),
    )
    .unwrap();
    let rate = surviving_rate(&res.tally).unwrap().rate;
    assert!(
        rate <= 0.05 + 3.0 * (0.05 * 0.95 / r as f64).sqrt(),
        "{rate}"
    );
}

#[test]
fn lr_monitor_gains_power_under_the_alternative() {
    let alt = accbias_core::Alternative::simple(1.0).unwrap();
    let rule = DecisionRule::lr_threshold(0.05, alt).unwrap();
    let policy = Policy::independent(1.0, AnalysisSchedule::EveryStudy).unwrap();
    let mut last = 0.0;
    for cap in [1, 3, 10, 40] {
        let cfg = SimConfig {
            t_cap: cap,
            hypothesis_mean: 1.0,
            ..config(20_000, 2)
        };
        let res = run_experiment(&policy, &cfg, &rule, &ExperimentOptions::default()).unwrap();
        let rate = surviving_rate(&res.tally).unwrap().rate;
        assert!(rate > last);
        last = rate;
    }
    assert!(last > 0.95, "{last}");
}
