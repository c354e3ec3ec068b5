use std::path::Path;
use std::process::{Command, Output};

use accbias_cli::config::RunConfig;
use accbias_cli::output::read_table;

fn accbias(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_accbias"))
        .args(args)
        .arg("--quiet")
        .env("ACCBIAS_OUT", out)
        .output()
        .expect("binary runs")
}

#[test]
fn table2_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let run = |out: &Path, threads: &str| {
        let o = accbias(&["table2", "--reps", "300000", "--threads", threads], out);
        // t = 5 is rarely reached at this size, so the ordering check may fail
        assert!(matches!(o.status.code(), Some(0 | 3)), "{o:?}");
    };
    run(&a, "1");
    run(&b, "3");
    let x = std::fs::read(a.join("table2.csv")).unwrap();
    let y = std::fs::read(b.join("table2.csv")).unwrap();
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("# accbias "));
    assert!(text.contains("# seed 1\n"));
    assert!(text.contains("# replications 300000\n"));
    assert!(b.join("table2.manifest.toml").exists());
}

#[test]
fn config_file_drives_the_run_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(
        &cfg_path,
        "[policy]\nname = \"independent\"\nindependent_continue_prob = 0.5\n\n\
         [sim]\nreplications = 20000\nseed = 7\nt_cap = 10\n\n[rule]\nkind = \"lr_threshold\"\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = accbias(&["simulate", "--config", cfg_path.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let table = read_table(&out.join("simulate.csv")).unwrap();
    assert_eq!(table.cell(0, "t"), Some("3"));
    let manifest = std::fs::read_to_string(out.join("simulate.manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 7"));
    let cfg = RunConfig::load(&cfg_path).unwrap();
    assert!(manifest.contains(&cfg.hash()));
    assert_eq!(RunConfig::parse(&cfg.to_toml()).unwrap(), cfg);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[sim]\nreplicatons = 3\n").unwrap();
    let o = accbias(&["table1", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("replicatons"));

    let o = accbias(
        &["analytic", "--config", "/nonexistent/run.toml"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));

    let file = dir.path().join("occupied");
    std::fs::write(&file, "").unwrap();
    let o = accbias(&["analytic"], &file);
    assert_eq!(o.status.code(), Some(2));

    // With a few hundred series no series reaches t = 3.
    let o = accbias(&["table2", "--reps", "200"], &dir.path().join("tiny"));
    assert_eq!(o.status.code(), Some(3));

    let o = accbias(&["selftest", "--reps", "200000"], &dir.path().join("self"));
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn bound_suite_reports_every_combination() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("suite.toml");
    std::fs::write(
        &cfg_path,
        "[policy]\nsuite = [\"gold_rush\", \"independent\"]\n\n[sim]\nt_cap = 20\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = accbias(
        &[
            "bound-suite",
            "--reps",
            "20000",
            "--config",
            cfg_path.to_str().unwrap(),
        ],
        &out,
    );
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let table = read_table(&out.join("bound_suite.csv")).unwrap();
    assert_eq!(table.rows.len(), 2 * 2 * 2);
    for i in 0..table.rows.len() {
        let status = table.cell(i, "status").unwrap();
        let lr_h0 = table.cell(i, "rule") == Some("lr_threshold")
            && table.cell(i, "hypothesis") == Some("H0");
        assert_eq!(status, if lr_h0 { "PASS" } else { "-" });
    }
    let by_t = read_table(&out.join("bound_suite_by_t.csv")).unwrap();
    assert!(!by_t.rows.is_empty());
}

#[test]
fn out_flag_beats_environment() {
    let dir = tempfile::tempdir().unwrap();
    let flag = dir.path().join("flag");
    let o = Command::new(env!("CARGO_BIN_EXE_accbias"))
        .args(["analytic", "--quiet", "--out", flag.to_str().unwrap()])
        .env("ACCBIAS_OUT", dir.path().join("env"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(flag.join("analytic.csv").exists());
    assert!(!dir.path().join("env").exists());
}
