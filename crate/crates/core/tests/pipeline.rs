mod common;

use std::process::Command;

use common::{files_with_ext, tiny_config};
use mpdist::pipeline::{Pipeline, Stage, UnitOutcome};

fn run_all(dir: &std::path::Path, countries: &[&str]) -> Pipeline {
    let cfg = tiny_config(dir, countries);
    let root = cfg.output_dir.clone();
    let mut p = Pipeline::with_root(cfg, root);
    p.run(Stage::GenerateSynthetic).unwrap();
    p.run(Stage::Report).unwrap();
    p
}

#[test]
fn second_run_is_fully_cached_and_repairs_damage() {
    let dir = tempfile::tempdir().unwrap();
    let first = run_all(dir.path(), &["AT", "DE", "FR"]);
    assert!(first.log.iter().all(|(_, o)| *o == UnitOutcome::Ran));
    let root = first.root.clone();
    let cfg = first.config.clone();

    let mut again = Pipeline::with_root(cfg.clone(), root.clone());
    again.run(Stage::Report).unwrap();
    assert!(!again.log.is_empty());
    assert!(again.log.iter().all(|(_, o)| *o == UnitOutcome::Cached), "{:?}", again.log);

    let damaged = root.join("fit-marginals").join("DE").join("selection.json");
    let original = std::fs::read(&damaged).unwrap();
    std::fs::write(&damaged, b"{}").unwrap();
    let mut repair = Pipeline::with_root(cfg.clone(), root.clone());
    repair.run(Stage::Report).unwrap();
    let ran: Vec<&str> = repair.log.iter().filter(|(_, o)| *o == UnitOutcome::Ran).map(|(k, _)| k.as_str()).collect();
    assert_eq!(ran, ["fit-marginals/DE"]);
    assert_eq!(std::fs::read(&damaged).unwrap(), original);

    let mut forced = Pipeline::with_root(cfg, root);
    forced.force = true;
    forced.run(Stage::FitMarginals).unwrap();
    assert!(forced.log.iter().all(|(_, o)| *o == UnitOutcome::Ran));
}

#[test]
fn changed_section_invalidates_only_downstream_units() {
    let dir = tempfile::tempdir().unwrap();
    let first = run_all(dir.path(), &["AT", "DE", "FR"]);
    let mut cfg = first.config.clone();
    cfg.microsim.default_replacement_rate = 0.4;
    let mut p = Pipeline::with_root(cfg, first.root.clone());
    p.run(Stage::Report).unwrap();
    for (key, outcome) in &p.log {
        let expect_ran = key.starts_with("simulate/") || key.starts_with("report");
        assert_eq!(*outcome == UnitOutcome::Ran, expect_ran, "{key}");
    }
}

#[test]
fn country_filter_restricts_units() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), &["AT", "BE"]);
    let mut p = Pipeline::with_root(cfg.clone(), cfg.output_dir.clone());
    p.run(Stage::GenerateSynthetic).unwrap();
    let mut q = Pipeline::with_root(cfg.clone(), cfg.output_dir.clone());
    q.countries_filter = vec!["BE".into()];
    q.run(Stage::FitMarginals).unwrap();
    assert_eq!(q.log.len(), 1);
    assert_eq!(q.log[0].0, "fit-marginals/BE");
    assert!(!cfg.output_dir.join("fit-marginals").join("AT").exists());
}

#[test]
fn cli_honours_output_env_and_reports_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), &["AT"]);
    let config_path = dir.path().join("run.toml");
    std::fs::write(&config_path, toml::to_string(&cfg).unwrap()).unwrap();
    let elsewhere = dir.path().join("elsewhere");
    let bin = env!("CARGO_BIN_EXE_mpdist");

    let status = Command::new(bin)
        .args(["generate-synthetic", "--config"])
        .arg(&config_path)
        .env("MPDIST_OUTPUT", &elsewhere)
        .status()
        .unwrap();
    assert!(status.success());
    let status = Command::new(bin)
        .args(["fit-marginals", "--country", "AT", "--seed", "9", "--threads", "1", "--config"])
        .arg(&config_path)
        .env("MPDIST_OUTPUT", &elsewhere)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(elsewhere.join("fit-marginals").join("AT").join("selection.csv").is_file());
    assert!(elsewhere.join("manifest.json").is_file());
    assert!(!cfg.output_dir.exists());

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[marginals]\nunknown_key = 3\n").unwrap();
    let out = Command::new(bin).args(["report", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let mut absent = cfg.clone();
    absent.countries = vec!["XX".into()];
    let absent_path = dir.path().join("absent.toml");
    std::fs::write(&absent_path, toml::to_string(&absent).unwrap()).unwrap();
    let out = Command::new(bin)
        .args(["fit-marginals", "--config"])
        .arg(&absent_path)
        .env("MPDIST_OUTPUT", dir.path().join("fresh"))
        .env("RUST_LOG", "off")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fit-marginals"));
}

#[test]
fn identical_runs_write_identical_tables() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_all(a.path(), &["AT", "DE", "IT"]);
    run_all(b.path(), &["AT", "DE", "IT"]);
    let fa = files_with_ext(a.path(), "csv");
    let fb = files_with_ext(b.path(), "csv");
    assert!(fa.len() > 20);
    assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>());
    for (k, v) in &fa {
        assert!(v == &fb[k], "{k} differs");
    }
}
