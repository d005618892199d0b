//! Configuration round trips, command-line behavior and report determinism.

use std::path::Path;
use std::process::Command;

use brwx::cli::{exit, main_with_args};
use brwx::config::{Displacement, Experiment, ExperimentConfig};
use brwx::report::ExperimentReport;
use brwx::run;
use brwx_core::stats::median;
use brwx_core::theory::f_closed;
use proptest::prelude::*;

fn brwx() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_brwx"));
    cmd.env_remove("BRWX_OUT_DIR");
    cmd
}

fn json_without_wall_time(report: &ExperimentReport) -> String {
    let mut v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    v.as_object_mut().unwrap().remove("wall_time_s");
    v.to_string()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
    (
        (0..Experiment::ALL.len(), 0..Displacement::ALL.len(), 0.01f64..0.99, 0.1f64..5.0, 0.1f64..3.0),
        (1u64..1_000_000, 1usize..20, 1u64..5000, 1u64..u64::MAX, any::<u64>()),
        (prop::collection::vec(0.01f64..10.0, 0..8), 1e4f64..4e9, 0.01f64..1.0, 0.01f64..0.99),
        (prop::option::of(1usize..64), prop::option::of("[a-z0-9_/.]{1,20}")),
    )
        .prop_map(|((e, d, alpha, beta, scale), (n, k, reps, cap, seed), (mut grid, switch, delta, ratio), (threads, out))| {
            grid.sort_by(f64::total_cmp);
            grid.dedup();
            let mut c = ExperimentConfig::defaults(Experiment::ALL[e]);
            c.displacement = Displacement::ALL[d];
            c.alpha = alpha;
            c.beta_or_r = beta;
            c.scale = scale;
            c.n = n;
            c.k = k;
            c.replicates = reps;
            c.cap = cap;
            c.master_seed = seed;
            c.thresholds = grid;
            c.surrogate_switch = switch;
            c.delta = delta;
            c.ratio = ratio;
            c.threads = threads;
            c.output = out.map(Into::into);
            c
        })
}

proptest! {
    #[test]
    fn kv_text_round_trips(c in arb_config()) {
        let back = ExperimentConfig::from_kv(&c.to_kv(), None).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn hash_ignores_only_execution_settings(c in arb_config(), t in 1usize..9) {
        let mut d = c.clone();
        d.threads = Some(t);
        d.output = None;
        prop_assert_eq!(d.hash(), c.hash());
        d.alpha = if c.alpha == 0.5 { 0.6 } else { 0.5 };
        prop_assert_ne!(d.hash(), c.hash());
    }
}

#[test]
fn usage_errors_exit_64_and_name_the_field() {
    for args in [
        vec!["brwx", "gw_convergence", "--alpha", "1.5"],
        vec!["brwx", "gw_convergence", "--alpha", "half"],
        vec!["brwx", "gw_convergence", "--frobnicate", "1"],
        vec!["brwx", "no_such_experiment"],
        vec!["brwx"],
        vec!["brwx", "frechet_max", "--displacement", "gaussian"],
        vec!["brwx", "lemma_order_stats", "--delta", "0"],
        vec!["brwx", "gw_convergence", "--surrogate-switch", "100"],
        vec!["brwx", "heavy_point_process", "--thresholds", "2,1"],
        vec!["brwx", "gw_convergence", "--beta", "1", "--r", "2"],
    ] {
        assert_eq!(main_with_args(args.clone()), exit::USAGE, "{args:?}");
    }
    let out = brwx().args(["mass_concentration", "--replicates", "zero"]).output().unwrap();
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`replicates`"));
    let out = brwx().args(["lemma_order_stats", "--delta", "1.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`delta`"));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(brwx().arg("--help").output().unwrap().status.code(), Some(0));
    let out = brwx().arg("--version").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("brwx "));
}

#[test]
fn config_file_sits_between_defaults_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.conf");
    std::fs::write(&file, "# small run\nexperiment = lemma_heavy_sums\nalpha = 0.3\nn = 5000\nreplicates = 7\n").unwrap();
    let cli = |extra: &[&str]| {
        let mut args = vec!["brwx", "--config", file.to_str().unwrap()];
        args.extend_from_slice(extra);
        <brwx::cli::Cli as clap::Parser>::try_parse_from(args).unwrap().resolve().unwrap()
    };
    let c = cli(&[]);
    assert_eq!((c.experiment, c.alpha, c.n, c.replicates), (Experiment::LemmaHeavySums, 0.3, 5000, 7));
    assert_eq!(c.master_seed, ExperimentConfig::defaults(Experiment::LemmaHeavySums).master_seed);
    let c = cli(&["--alpha", "0.4", "--seed", "9"]);
    assert_eq!((c.alpha, c.n, c.master_seed), (0.4, 5000, 9));
    // A positional experiment overrides the file's and takes its defaults.
    let c = cli(&["mass_concentration"]);
    assert_eq!((c.experiment, c.alpha, c.replicates), (Experiment::MassConcentration, 0.3, 7));

    std::fs::write(&file, "experiment = lemma_heavy_sums\ncolour = blue\n").unwrap();
    assert_eq!(main_with_args(["brwx", "--config", file.to_str().unwrap()]), exit::USAGE);
    assert_eq!(main_with_args(["brwx", "--config", "/nonexistent/brwx.conf"]), exit::IO);
}

#[test]
fn reports_land_in_the_chosen_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = brwx()
        .args(["lemma_heavy_sums", "--n", "2000", "--replicates", "25", "--seed", "3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(matches!(out.status.code(), Some(0 | 1)), "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("lemma_heavy_sums.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("replicate,z_n_log,w_hat,m_n,ratio,truncated"));
    assert_eq!(lines.count(), 25);
    let json = read_json(&dir.path().join("lemma_heavy_sums.json"));
    assert_eq!(json["config"]["master_seed"], 3);
    assert_eq!(json["config_hash"].as_str().unwrap().len(), 64);
    assert!(json["version"].as_str().unwrap().starts_with("0."));
    assert!(json["aggregates"].as_array().unwrap().iter().all(|c| !c["provenance"].as_str().unwrap().is_empty()));

    // Without --out the environment decides.
    let env_dir = tempfile::tempdir().unwrap();
    let out = brwx()
        .args(["lemma_regvar_sum"])
        .env("BRWX_OUT_DIR", env_dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(env_dir.path().join("lemma_regvar_sum.json").exists());
}

#[test]
fn unwritable_output_exits_74() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = brwx().args(["lemma_regvar_sum", "--out"]).arg(blocker.join("sub")).output().unwrap();
    assert_eq!(out.status.code(), Some(74));
}

#[test]
fn same_seed_same_report_modulo_wall_time() {
    let mut c = ExperimentConfig::defaults(Experiment::HeavyPointProcess);
    c.replicates = 150;
    c.cap = 100_000;
    let a = run(&c).unwrap();
    c.threads = Some(3);
    c.output = Some("elsewhere".into());
    let b = run(&c).unwrap();
    assert_eq!(json_without_wall_time(&a), json_without_wall_time(&b));
    assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    c.master_seed += 1;
    assert_ne!(json_without_wall_time(&a), json_without_wall_time(&run(&c).unwrap()));
}

#[test]
fn truncation_count_never_exceeds_replicates() {
    let mut c = ExperimentConfig::defaults(Experiment::FrechetMax);
    c.replicates = 100;
    c.cap = 50;
    let r = run(&c).unwrap();
    assert!(r.truncation_count <= r.replicates);
    assert_eq!(r.rows.iter().filter(|row| row.truncated).count() as u64, r.truncation_count);
    // A cap this small stops most runs early.
    assert!(2 * r.truncation_count > r.replicates);
    assert_eq!(r.status, brwx::Status::Inconclusive);
    assert_eq!(r.status.exit_code(), exit::INCONCLUSIVE);
}

#[test]
#[allow(clippy::approx_constant)] // the documented six-digit value
fn constants_table_example() {
    let mut c = ExperimentConfig::defaults(Experiment::ConstantsTable);
    c.alpha = 0.5;
    c.beta_or_r = 2.0;
    c.k = 10;
    let r = run(&c).unwrap();
    let target = |name: &str| r.theory_targets.iter().find(|t| t.name == name).unwrap().value;
    assert!((target("light_constant") - 1.414214).abs() < 5e-7);
    for k in 0..=10 {
        assert_eq!(target(&format!("f_{k}")), f_closed(0.5, 2.0, k).unwrap());
    }
    assert_eq!(r.status, brwx::Status::Pass);
}

#[test]
fn regvar_example_with_identity() {
    let mut c = ExperimentConfig::defaults(Experiment::LemmaRegvarSum);
    c.beta_or_r = 1.0;
    c.ratio = 0.5;
    c.n = 200;
    let r = run(&c).unwrap();
    let power = r.check("regvar_sum_power").unwrap();
    assert!((power.statistic.unwrap() - 2.0).abs() <= 1e-6);
    assert!(power.pass);
}

fn order_stat_median(delta: f64, n: u64, replicates: u64) -> f64 {
    let mut c = ExperimentConfig::defaults(Experiment::LemmaOrderStats);
    c.displacement = Displacement::Weibull;
    c.beta_or_r = 1.0;
    c.scale = 1.0;
    c.delta = delta;
    c.n = n;
    c.replicates = replicates;
    let r = run(&c).unwrap();
    let ratios: Vec<f64> = r.rows.iter().map(|row| row.ratio.unwrap()).collect();
    assert!(ratios.iter().all(|x| x.is_finite()));
    median(&ratios).unwrap()
}

#[test]
fn order_statistics_of_unit_weibull() {
    let m = order_stat_median(0.5, 24, 50);
    assert!((0.95..=1.05).contains(&m), "delta=0.5: {m}");
    let m = order_stat_median(1.0, 24, 50);
    assert!((0.9..=1.1).contains(&m), "delta=1: {m}");
    // a_n = 2 is degenerate but defined.
    order_stat_median(0.5, 1, 3);
}
