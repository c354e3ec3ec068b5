//! The subcommands. Each writes its CSVs and a manifest into the output
//! directory and returns a [`Report`].

use std::path::{Path, PathBuf};

use accbias_core::analytics::{
    abar0, bias_only_type1, enumerate_categories, expected_meta_z, expected_mid_given_next,
    expected_pilot_given_next, expected_study_given_next, long_run_significant_fraction,
    tail_expectation,
};
use accbias_core::engine::{conditional_rate, first_error_decomposition, surviving_rate};
use accbias_core::inference::{betting_factor_expectation_check, SimpleAlternative};
use accbias_core::stats::{bootstrap_ci, sample_skewness, Moments};
use accbias_core::{
    normal, run_experiment, AnalysisSchedule, DecisionRule, Error, ErrorTally, ExperimentOptions,
    GoldRushParams, Policy, SimConfig,
};

use crate::config::RunConfig;
use crate::output::{fmt6, full, write_manifest, write_table, Provenance, Table};
use crate::CliError;

/// Where and how to run.
#[derive(Debug, Clone)]
pub struct Context {
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    pub quiet: bool,
}

/// Files written, lines for the terminal and failed property checks.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub outputs: Vec<PathBuf>,
    pub lines: Vec<String>,
    pub failures: Vec<String>,
}

fn core(e: Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn provenance(command: &str, cfg: &RunConfig) -> Provenance {
    Provenance {
        command: command.into(),
        seed: cfg.sim.seed,
        replications: cfg.sim.replications,
        config_hash: cfg.hash(),
    }
}

fn finish(
    ctx: &Context,
    prov: &Provenance,
    cfg: &RunConfig,
    tables: &[(&str, &Table)],
    mut report: Report,
) -> Result<Report, CliError> {
    for (name, table) in tables {
        report
            .outputs
            .push(write_table(&ctx.out_dir, name, table, prov)?);
    }
    let manifest = write_manifest(&ctx.out_dir, prov, cfg, &report.outputs)?;
    report.outputs.push(manifest);
    Ok(report)
}

fn gold_rush(cfg: &RunConfig) -> Result<(GoldRushParams, Policy), CliError> {
    let params = cfg.policy.gold_rush_params();
    let policy = Policy::gold_rush(params, AnalysisSchedule::EveryStudy)
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok((params, policy))
}

/// Null simulation settings for the Gold Rush tables.
fn null_sim(cfg: &RunConfig, t_max: u32) -> Result<SimConfig, CliError> {
    let mut sim = cfg.sim.sim_config()?;
    sim.hypothesis_mean = 0.0;
    if t_max > sim.t_cap {
        return Err(CliError::Config(format!(
            "table size {t_max} exceeds t_cap {}",
            sim.t_cap
        )));
    }
    Ok(sim)
}

fn na() -> String {
    "NA".into()
}

/// Expected Z-scores under the null: analytic columns and simulated means.
pub fn table1(cfg: &RunConfig, ctx: &Context) -> Result<Report, CliError> {
    let t_max = cfg.sim.table1_t_max;
    let (params, policy) = gold_rush(cfg)?;
    let sim = null_sim(cfg, t_max)?;
    let rule = DecisionRule::z_test(params.alpha).map_err(core)?;
    let opts = ExperimentOptions {
        histogram_times: (1..=t_max).collect(),
        threads: ctx.threads,
        ..ExperimentOptions::default()
    };
    let res = run_experiment(&policy, &sim, &rule, &opts).map_err(core)?;
    let mut table = Table::new(&[
        "t",
        "e0_z_t",
        "e0_z_t_given_next",
        "e0_meta_z",
        "mc_mean",
        "mc_se",
        "mc_series",
        "mc_deviation_se",
        "e0_z_t_given_next_full",
        "e0_meta_z_full",
        "mc_mean_full",
        "mc_se_full",
    ]);
    let mut report = Report::default();
    for t in 1..=t_max {
        let next = expected_study_given_next(t, &params).map_err(core)?;
        let meta = expected_meta_z(t, &params).map_err(core)?;
        let m = res.moments[&t];
        let mut row = vec![t.to_string(), "0".into(), fmt6(next), fmt6(meta)];
        if m.n >= 2 {
            let dev = (m.mean() - meta) / m.se_mean();
            row.extend([
                fmt6(m.mean()),
                fmt6(m.se_mean()),
                m.n.to_string(),
                fmt6(dev),
            ]);
            report.lines.push(format!(
                "t={t}: E0[Z^(t)|T>=t] = {} (simulated {} +- {}, {} series)",
                fmt6(meta),
                fmt6(m.mean()),
                fmt6(m.se_mean()),
                m.n
            ));
            row.extend([full(next), full(meta), full(m.mean()), full(m.se_mean())]);
        } else {
            row.extend([
                na(),
                na(),
                m.n.to_string(),
                na(),
                full(next),
                full(meta),
                na(),
                na(),
            ]);
        }
        table.push(row);
    }
    finish(
        ctx,
        &provenance("table1", cfg),
        cfg,
        &[("table1.csv", &table)],
        report,
    )
}

/// Type-I error rates of the conventional Z-test under the null.
pub fn table2(cfg: &RunConfig, ctx: &Context) -> Result<Report, CliError> {
    let t_max = cfg.sim.table2_t_max;
    let (params, policy) = gold_rush(cfg)?;
    let sim = null_sim(cfg, t_max)?;
    let rule = DecisionRule::z_test(params.alpha).map_err(core)?;
    let opts = ExperimentOptions {
        threads: ctx.threads,
        ..ExperimentOptions::default()
    };
    let res = run_experiment(&policy, &sim, &rule, &opts).map_err(core)?;
    let mut table = Table::new(&[
        "t",
        "bias_only_rate",
        "simulated_rate",
        "simulated_se",
        "analyses",
        "rejections",
        "gap_se",
        "ordering",
        "bias_only_rate_full",
        "simulated_rate_full",
        "simulated_se_full",
    ]);
    let mut report = Report::default();
    for t in 1..=t_max {
        let bias = bias_only_type1(t, &params).map_err(core)?;
        let c = res.tally.at(t);
        match conditional_rate(&res.tally, t) {
            Ok(r) => {
                let gap = if r.se > 0.0 {
                    fmt6((r.rate - bias) / r.se)
                } else {
                    na()
                };
                let ordering = if t == 1 {
                    "-".to_string()
                } else if r.rate > bias && bias > params.alpha {
                    "PASS".into()
                } else {
                    report.failures.push(format!(
                        "table2 t={t}: simulated {} vs bias-only {}",
                        r.rate, bias
                    ));
                    "FAIL".into()
                };
                report.lines.push(format!(
                    "t={t}: bias-only {} simulated {} +- {} ({} analyses) {ordering}",
                    fmt6(bias),
                    fmt6(r.rate),
                    fmt6(r.se),
                    c.analyses
                ));
                table.push(vec![
                    t.to_string(),
                    fmt6(bias),
                    fmt6(r.rate),
                    fmt6(r.se),
                    c.analyses.to_string(),
                    c.rejections.to_string(),
                    gap,
                    ordering,
                    full(bias),
                    full(r.rate),
                    full(r.se),
                ]);
            }
            Err(Error::UndefinedRate { .. }) => {
                report
                    .failures
                    .push(format!("table2 t={t}: no series reached this size"));
                table.push(vec![
                    t.to_string(),
                    fmt6(bias),
                    na(),
                    na(),
                    "0".into(),
                    "0".into(),
                    na(),
                    "UNDEFINED".into(),
                    full(bias),
                    na(),
                    na(),
                ]);
            }
            Err(e) => return Err(core(e)),
        }
    }
    finish(
        ctx,
        &provenance("table2", cfg),
        cfg,
        &[("table2.csv", &table)],
        report,
    )
}

/// Sampling distributions of `Z_1`, `Z^(2) | T >= 2` and `Z^(3) | T >= 3`.
pub fn figure2(cfg: &RunConfig, ctx: &Context) -> Result<Report, CliError> {
    let (params, policy) = gold_rush(cfg)?;
    let sim = null_sim(cfg, 3)?;
    let rule = DecisionRule::z_test(params.alpha).map_err(core)?;
    let opts = ExperimentOptions {
        histogram_times: vec![1, 2, 3],
        sample_times: vec![3],
        threads: ctx.threads,
    };
    let res = run_experiment(&policy, &sim, &rule, &opts).map_err(core)?;
    let e3 = expected_meta_z(3, &params).map_err(core)?;

    let mut density = Table::new(&["z", "z1", "z2_given_t2", "z3_given_t3", "shifted_normal_t3"]);
    let dens: Vec<Vec<f64>> = (1..=3).map(|t| res.histograms[&t].densities()).collect();
    let h1 = &res.histograms[&1];
    for (bin, ((d1, d2), d3)) in dens[0].iter().zip(&dens[1]).zip(&dens[2]).enumerate() {
        let z = h1.midpoint(bin);
        density.push(vec![
            fmt6(z),
            fmt6(*d1),
            fmt6(*d2),
            fmt6(*d3),
            fmt6(normal::pdf(z - e3)),
        ]);
    }

    let enumeration = enumerate_categories(3, &params).map_err(core)?;
    let mut summary = Table::new(&[
        "distribution",
        "series",
        "mean",
        "variance",
        "skewness",
        "skewness_ci_low",
        "skewness_ci_high",
        "reference_mean",
        "max_component_variance",
        "variance_full",
        "skewness_full",
        "skewness_ci_low_full",
        "skewness_ci_high_full",
        "max_component_variance_full",
    ]);
    let mut report = Report::default();
    for (t, name) in [(1u32, "z1"), (2, "z2_given_t2"), (3, "z3_given_t3")] {
        let m: Moments = res.moments[&t];
        let reference = expected_meta_z(t, &params).map_err(core)?;
        let max_comp = enumeration
            .meta_z_mixture(t)
            .iter()
            .map(|c| c.variance)
            .fold(f64::NEG_INFINITY, f64::max);
        let ci = match res.samples.get(&t) {
            Some(s) if s.len() >= 2 => Some(
                bootstrap_ci(
                    s,
                    sample_skewness,
                    cfg.sim.bootstrap_resamples.max(1) as usize,
                    0.95,
                    cfg.sim.seed,
                )
                .map_err(core)?,
            ),
            _ => None,
        };
        if m.n < 2 {
            report
                .failures
                .push(format!("figure2 {name}: fewer than two series"));
            continue;
        }
        let (lo, hi) = ci.map_or((na(), na()), |(l, h)| (fmt6(l), fmt6(h)));
        let (lo_f, hi_f) = ci.map_or((na(), na()), |(l, h)| (full(l), full(h)));
        if t == 3 {
            let excludes = ci.is_some_and(|(_, h)| h < 0.0);
            if !(m.skewness() < 0.0 && excludes) {
                report.failures.push(format!(
                    "figure2: skewness of Z^(3) {} not clearly negative",
                    m.skewness()
                ));
            }
        }
        if t == 2 && m.variance() <= max_comp {
            report.failures.push(format!(
                "figure2: Var(Z^(2)) {} does not exceed component variance {max_comp}",
                m.variance()
            ));
        }
        report.lines.push(format!(
            "{name}: mean {} variance {} skewness {} ({} series)",
            fmt6(m.mean()),
            fmt6(m.variance()),
            fmt6(m.skewness()),
            m.n
        ));
        summary.push(vec![
            name.into(),
            m.n.to_string(),
            fmt6(m.mean()),
            fmt6(m.variance()),
            fmt6(m.skewness()),
            lo,
            hi,
            fmt6(reference),
            fmt6(max_comp),
            full(m.variance()),
            full(m.skewness()),
            lo_f,
            hi_f,
            full(max_comp),
        ]);
    }
    finish(
        ctx,
        &provenance("figure2", cfg),
        cfg,
        &[("figure2.csv", &density), ("figure2_summary.csv", &summary)],
        report,
    )
}

fn by_t_rows(table: &mut Table, prefix: &[String], tally: &ErrorTally) {
    for t in 1..=tally.max_t() {
        let c = tally.at(t);
        let first = tally.first_error_at(t);
        if c.analyses == 0 && first == 0 {
            continue;
        }
        let (rate, se) = match conditional_rate(tally, t) {
            Ok(r) => (fmt6(r.rate), fmt6(r.se)),
            Err(_) => (na(), na()),
        };
        let mut row = prefix.to_vec();
        row.extend([
            t.to_string(),
            c.series_reaching.to_string(),
            c.analyses.to_string(),
            c.rejections.to_string(),
            rate,
            se,
            first.to_string(),
        ]);
        table.push(row);
    }
}

const BY_T_COLUMNS: [&str; 7] = [
    "t",
    "series_reaching",
    "analyses",
    "rejections",
    "conditional_rate",
    "conditional_se",
    "first_errors",
];

/// Every policy of the suite against the Z-test and the LR rule, under
/// both hypotheses.
pub fn bound_suite(cfg: &RunConfig, ctx: &Context) -> Result<Report, CliError> {
    let base = cfg.sim.sim_config()?;
    let alpha = cfg.rule.alpha;
    let rules = [cfg.rule.build("z_test")?, cfg.rule.build("lr_threshold")?];
    let mut summary = Table::new(&[
        "policy",
        "rule",
        "hypothesis",
        "series",
        "any_rejection",
        "surviving_rate",
        "surviving_se",
        "bound",
        "status",
        "censored",
        "surviving_rate_full",
    ]);
    let mut header = vec!["policy", "rule", "hypothesis"];
    header.extend(BY_T_COLUMNS);
    let mut by_t = Table::new(&header);
    let mut report = Report::default();
    for name in &cfg.policy.suite {
        let policy = cfg.policy.build(name)?;
        for rule in &rules {
            for (hyp, mean) in [("H0", 0.0), ("H1", cfg.rule.delta)] {
                let sim = SimConfig {
                    hypothesis_mean: mean,
                    ..base.clone()
                };
                let opts = ExperimentOptions {
                    threads: ctx.threads,
                    ..ExperimentOptions::default()
                };
                let res = run_experiment(&policy, &sim, rule, &opts).map_err(core)?;
                let tally = &res.tally;
                let rate = surviving_rate(tally).map_err(core)?;
                let firsts: u64 = first_error_decomposition(tally).iter().map(|x| x.1).sum();
                if firsts != tally.series_with_any_rejection {
                    report.failures.push(format!(
                        "{name}/{}/{hyp}: first errors sum to {firsts}, any-rejection count {}",
                        rule.name(),
                        tally.series_with_any_rejection
                    ));
                }
                let bound =
                    alpha + 3.0 * (alpha * (1.0 - alpha) / tally.series_total as f64).sqrt();
                let status = match (rule, hyp) {
                    (DecisionRule::LrThreshold { .. }, "H0") if rate.rate > bound => {
                        report.failures.push(format!(
                            "{name}/lr_threshold/H0: surviving rate {} exceeds {}",
                            rate.rate, bound
                        ));
                        "FAIL"
                    }
                    (DecisionRule::LrThreshold { .. }, "H0") => "PASS",
                    _ => "-",
                };
                report.lines.push(format!(
                    "{name:<14} {:<13} {hyp}: surviving rate {} +- {} {status}",
                    rule.name(),
                    fmt6(rate.rate),
                    fmt6(rate.se)
                ));
                summary.push(vec![
                    name.clone(),
                    rule.name().into(),
                    hyp.into(),
                    tally.series_total.to_string(),
                    tally.series_with_any_rejection.to_string(),
                    fmt6(rate.rate),
                    fmt6(rate.se),
                    fmt6(bound),
                    status.into(),
                    tally.censored.to_string(),
                    full(rate.rate),
                ]);
                let prefix = [name.clone(), rule.name().to_string(), hyp.to_string()];
                by_t_rows(&mut by_t, &prefix, tally);
            }
        }
    }
    finish(
        ctx,
        &provenance("bound-suite", cfg),
        cfg,
        &[
            ("bound_suite.csv", &summary),
            ("bound_suite_by_t.csv", &by_t),
        ],
        report,
    )
}

/// The configured policy and rule, tallied per series size.
pub fn simulate(cfg: &RunConfig, ctx: &Context) -> Result<Report, CliError> {
    let policy = cfg.policy.selected()?;
    let rule = cfg.rule.selected()?;
    let sim = cfg.sim.sim_config()?;
    let opts = ExperimentOptions {
        threads: ctx.threads,
        ..ExperimentOptions::default()
    };
    let res = run_experiment(&policy, &sim, &rule, &opts).map_err(core)?;
    let mut table = Table::new(&BY_T_COLUMNS);
    by_t_rows(&mut table, &[], &res.tally);
    let rate = surviving_rate(&res.tally).map_err(core)?;
    let report = Report {
        lines: vec![format!(
            "{} / {}: surviving rejection rate {} +- {} over {} series ({} censored)",
            policy.name(),
            rule.name(),
            fmt6(rate.rate),
            fmt6(rate.se),
            res.tally.series_total,
            res.tally.censored
        )],
        ..Report::default()
    };
    finish(
        ctx,
        &provenance("simulate", cfg),
        cfg,
        &[("simulate.csv", &table)],
        report,
    )
}

/// Closed-form Gold Rush quantities.
pub fn analytic(cfg: &RunConfig, ctx: &Context) -> Result<Report, CliError> {
    let params = cfg.policy.gold_rush_params();
    let crit = normal::two_sided_critical(params.alpha);
    let mut report = Report::default();
    let pilot = expected_pilot_given_next(&params).map_err(core)?;
    let mid = expected_mid_given_next(&params).map_err(core)?;
    report.lines.extend([
        format!("critical value z_(alpha/2)        {}", fmt6(crit)),
        format!(
            "E0[Z | Z >= z_(alpha/2)]          {}",
            fmt6(tail_expectation(crit))
        ),
        format!("E0[Z_1 | T >= 2]                  {}", fmt6(pilot)),
        format!("E0[Z_t | T >= t+1], t >= 2        {}", fmt6(mid)),
        format!(
            "long-run significant fraction     {}",
            fmt6(long_run_significant_fraction(&params))
        ),
    ]);
    let mut table = Table::new(&[
        "t",
        "abar0",
        "e0_z_t_given_next",
        "e0_meta_z",
        "bias_only_rate",
        "abar0_full",
        "e0_meta_z_full",
        "bias_only_rate_full",
    ]);
    for t in 1..=cfg.sim.table1_t_max {
        let a = abar0(t, &params);
        let e = expected_meta_z(t, &params).map_err(core)?;
        let b = bias_only_type1(t, &params).map_err(core)?;
        table.push(vec![
            t.to_string(),
            fmt6(a),
            fmt6(expected_study_given_next(t, &params).map_err(core)?),
            fmt6(e),
            fmt6(b),
            full(a),
            full(e),
            full(b),
        ]);
    }
    finish(
        ctx,
        &provenance("analytic", cfg),
        cfg,
        &[("analytic.csv", &table)],
        report,
    )
}

fn check(report: &mut Report, table: &mut Table, name: &str, ok: bool, detail: String) {
    let status = if ok { "PASS" } else { "FAIL" };
    report.lines.push(format!("{status} {name}: {detail}"));
    if !ok {
        report.failures.push(format!("{name}: {detail}"));
    }
    table.push(vec![name.into(), status.into(), detail]);
}

/// Cross-checks of closed forms against independent computations and a
/// short simulation.
pub fn selftest(cfg: &RunConfig, ctx: &Context) -> Result<Report, CliError> {
    let params = GoldRushParams::default();
    let mut report = Report::default();
    let mut table = Table::new(&["check", "status", "detail"]);
    let crit = normal::two_sided_critical(0.05);

    let tail = tail_expectation(crit);
    let tail_quad = accbias_core::quadrature::simpson(|z| z * normal::pdf(z), crit, 40.0, 200_000)
        / normal::sf(crit);
    check(
        &mut report,
        &mut table,
        "tail_expectation",
        (tail - 2.338).abs() < 1e-3 && (tail - tail_quad).abs() < 1e-9,
        format!("{tail} (quadrature {tail_quad})"),
    );
    let pilot = expected_pilot_given_next(&params).map_err(core)?;
    let mid = expected_mid_given_next(&params).map_err(core)?;
    check(
        &mut report,
        &mut table,
        "selection_bias",
        (pilot - 0.487).abs() < 1e-3 && (mid - 1.328).abs() < 1e-3,
        format!("pilot {pilot}, later {mid}"),
    );
    let enumeration = enumerate_categories(8, &params).map_err(core)?;
    let worst = (1..=8)
        .map(|t| (enumeration.surviving_mass(t) - abar0(t, &params)).abs())
        .fold(0.0, f64::max);
    check(
        &mut report,
        &mut table,
        "survival_enumeration",
        worst < 1e-12 && (abar0(2, &params) - 0.12).abs() < 1e-15,
        format!("max |enumeration - abar0| = {worst:e}"),
    );
    let worst_mean = (2..=6)
        .map(|t| (enumeration.meta_z_mean(t) - expected_meta_z(t, &params).unwrap()).abs())
        .fold(0.0, f64::max);
    check(
        &mut report,
        &mut table,
        "meta_mean_enumeration",
        worst_mean < 1e-9,
        format!("max |mixture mean - closed form| = {worst_mean:e}"),
    );
    let worst_bet = [0.0, 0.5, 1.0, 2.0, 3.0]
        .iter()
        .map(|&d| (betting_factor_expectation_check(&SimpleAlternative { delta: d }) - 1.0).abs())
        .fold(0.0, f64::max);
    check(
        &mut report,
        &mut table,
        "betting_factor",
        worst_bet < 1e-8,
        format!("max |E0[s(Z)] - 1| = {worst_bet:e}"),
    );
    let b3 = bias_only_type1(3, &params).map_err(core)?;
    check(
        &mut report,
        &mut table,
        "bias_only_rate",
        (b3 - 0.182).abs() < 1e-3,
        format!("t=3: {b3}"),
    );

    let reps = cfg.sim.replications.min(1_000_000);
    let policy = Policy::gold_rush(params, AnalysisSchedule::EveryStudy).map_err(core)?;
    let sim = SimConfig {
        replications: reps,
        seed: cfg.sim.seed,
        ..SimConfig::default()
    };
    let opts = ExperimentOptions {
        histogram_times: vec![2, 3],
        threads: ctx.threads,
        ..ExperimentOptions::default()
    };
    let res = run_experiment(
        &policy,
        &sim,
        &DecisionRule::z_test(0.05).map_err(core)?,
        &opts,
    )
    .map_err(core)?;
    let reached = res.tally.at(2).series_reaching as f64 / reps as f64;
    let se = (0.12 * 0.88 / reps as f64).sqrt();
    check(
        &mut report,
        &mut table,
        "simulated_survival",
        (reached - 0.12).abs() < 3.0 * se,
        format!("P[T >= 2] = {reached} (0.12 +- {se})"),
    );
    let m3 = res.moments[&3];
    let e3 = expected_meta_z(3, &params).map_err(core)?;
    check(
        &mut report,
        &mut table,
        "simulated_meta_mean",
        m3.n > 1 && (m3.mean() - e3).abs() < 3.0 * m3.se_mean(),
        format!(
            "E[Z^(3)] = {} +- {} (closed form {e3})",
            m3.mean(),
            m3.se_mean()
        ),
    );
    let mut cfg_for_prov = cfg.clone();
    cfg_for_prov.sim.replications = reps;
    finish(
        ctx,
        &provenance("selftest", &cfg_for_prov),
        cfg,
        &[("selftest.csv", &table)],
        report,
    )
}

/// Resolves the output directory: flag or environment first, then config.
pub fn output_dir(cfg: &RunConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir))
}
