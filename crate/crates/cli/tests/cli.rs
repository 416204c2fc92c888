use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use edge_epirisk::{compare_passes, RiskReport};
use epirisk::analytic::p_inf_static;
use epirisk::montecarlo::{estimate_p_inf, McOptions};
use epirisk::ScenarioConfig;
use proptest::prelude::*;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_edge-epirisk");

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let Output { status, stdout, stderr } = Command::new(BIN).args(args).output().unwrap();
    Run { code: status.code().unwrap(), stdout: String::from_utf8(stdout).unwrap(), stderr: String::from_utf8(stderr).unwrap() }
}

fn config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Data rows after the version comment and the column line.
fn rows(text: &str, command: &str, columns: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), format!("# edge-epirisk v{} {command}", edge_epirisk::VERSION));
    assert_eq!(lines.next().unwrap(), columns);
    assert!(!text.contains('\r'));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn f(x: &str) -> f64 {
    x.parse().unwrap()
}

const STATIC_N10: &str = "radius = 100\nn_infected = 10\npath_loss = 2\nvol_threshold = 0.1\nmobility.model = static\nmc.trials = 20000\n";

#[test]
fn analytic_curve_is_sorted_and_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "a.cfg", STATIC_N10);
    let out = dir.path().join("a.csv");
    let r = run(&["analytic", "--config", s(&cfg), "--grid", "1e-3:1:7:log", "--out", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let first = std::fs::read(&out).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    let data = rows(&text, "analytic", "v_th,p_inf");
    assert_eq!(data.len(), 7);
    for w in data.windows(2) {
        assert!(f(&w[0][0]) < f(&w[1][0]));
        assert!(f(&w[0][1]) >= f(&w[1][1]));
    }
    run(&["analytic", "--config", s(&cfg), "--grid", "1e-3:1:7:log", "--out", s(&out)]);
    assert_eq!(std::fs::read(&out).unwrap(), first);

    let huge = run(&["analytic", "--config", s(&cfg), "--grid", "1e9:1e9:1"]);
    let data = rows(&huge.stdout, "analytic", "v_th,p_inf");
    assert_eq!(data.len(), 1);
    assert!(f(&data[0][1]) < 1e-9);
}

#[test]
fn model_flag_switches_the_analytic_model() {
    let a = run(&["analytic", "--grid", "0.01:0.01:1", "--model", "rwp"]);
    let b = run(&["analytic", "--grid", "0.01:0.01:1"]);
    assert_ne!(a.stdout, b.stdout);
    let rd = run(&["analytic", "--grid", "0.01:0.01:1", "--model", "rd"]);
    assert_eq!(rd.stdout, b.stdout);
}

#[test]
fn simulate_writes_one_estimate() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "s.cfg", STATIC_N10);
    let r = run(&["simulate", "--config", s(&cfg), "--seed", "9"]);
    assert_eq!(r.code, 0);
    let data = rows(&r.stdout, "simulate", "p_hat,std_err,ci_lo,ci_hi,trials,seed");
    assert_eq!(data.len(), 1);
    let row = &data[0];
    assert_eq!(row[4], "20000");
    assert_eq!(row[5], "9");
    assert!(f(&row[2]) <= f(&row[0]) && f(&row[0]) <= f(&row[3]));
    let again = run(&["simulate", "--config", s(&cfg), "--seed", "9", "--workers", "3"]);
    assert_eq!(again.stdout, r.stdout);
}

#[test]
fn single_trial_simulation_warns() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "s.cfg", &format!("{STATIC_N10}mc.trials = 1\n").replace("mc.trials = 20000\n", ""));
    let r = run(&["simulate", "--config", s(&cfg)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let row = &rows(&r.stdout, "simulate", "p_hat,std_err,ci_lo,ci_hi,trials,seed")[0];
    assert!(row[0] == "0.0" || row[0] == "1.0");
    assert_eq!(f(&row[1]), 0.0);
    assert!(r.stderr.contains("warning: only 1 trials"));
}

#[test]
fn compare_passes_on_a_calibration_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "c.cfg", "radius = 100\nn_infected = 20\npath_loss = 2.5\nmc.trials = 20000\n");
    let r = run(&["compare", "--config", s(&cfg), "--grid", "1e-3:1.6e-2:5:log", "--seed", "4"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let data = rows(&r.stdout, "compare", "V_th,p_analytic,p_mc,std_err,gap,pass");
    assert_eq!(data.len(), 5);
    for row in &data {
        assert_eq!(row[5], "true");
        assert!((f(&row[4]) - (f(&row[1]) - f(&row[2])).abs()).abs() < 1e-15);
    }
}

#[test]
fn compare_failure_exits_with_four() {
    let dir = TempDir::new().unwrap();
    // one trial gives p_mc in {0, 1} with zero standard error
    let cfg = config(&dir, "c.cfg", "radius = 100\nn_infected = 20\npath_loss = 2.5\nmc.trials = 1\n");
    let out = dir.path().join("c.csv");
    let r = run(&["compare", "--config", s(&cfg), "--grid", "4e-3:4e-3:1", "--out", s(&out)]);
    assert_eq!(r.code, 4);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(rows(&text, "compare", "V_th,p_analytic,p_mc,std_err,gap,pass")[0][5], "false");
}

#[test]
fn compare_on_an_empty_grid_is_empty() {
    let r = run(&["compare", "--grid", "0:1:0"]);
    assert_eq!(r.code, 0);
    assert!(rows(&r.stdout, "compare", "V_th,p_analytic,p_mc,std_err,gap,pass").is_empty());
}

#[test]
fn sweep_is_long_format() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "w.cfg", "radius = 20\nn_infected = 2\npath_loss = 3\nvol_threshold = 0.1\n");
    let r = run(&["sweep", "--config", s(&cfg), "--grid", "0.05:0.1:2", "--param", "n_infected", "--values", "2,15"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let data = rows(&r.stdout, "sweep", "param_value,v_th,p_inf");
    assert_eq!(data.len(), 4);
    assert_eq!((f(&data[0][0]), f(&data[3][0])), (2.0, 15.0));
    assert!(f(&data[3][2]) > f(&data[1][2]));

    let single = run(&["sweep", "--config", s(&cfg), "--grid", "0.05:0.1:2", "--param", "n_infected", "--values", "2"]);
    let curve = run(&["analytic", "--config", s(&cfg), "--grid", "0.05:0.1:2"]);
    let strip: Vec<Vec<String>> = rows(&single.stdout, "sweep", "param_value,v_th,p_inf").into_iter().map(|r| r[1..].to_vec()).collect();
    assert_eq!(strip, rows(&curve.stdout, "analytic", "v_th,p_inf"));
}

#[test]
fn sweep_over_path_loss_decreases() {
    for d in ["1", "20", "100"] {
        let dir = TempDir::new().unwrap();
        let cfg = config(&dir, "w.cfg", &format!("radius = {d}\nn_infected = 20\nvol_threshold = 0.1\n"));
        let r = run(&["sweep", "--config", s(&cfg), "--grid", "0.1:0.1:1", "--param", "path_loss", "--values", "2,2.5,3"]);
        let p: Vec<f64> = rows(&r.stdout, "sweep", "param_value,v_th,p_inf").iter().map(|r| f(&r[2])).collect();
        assert!(p[0] > p[1] && p[1] > p[2], "D = {d}: {p:?}");
    }
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let bad_key = config(&dir, "k.cfg", "radius = 100\nwidth = 3\n");
    let bad_value = config(&dir, "v.cfg", "radius = -1\n");
    let static_cfg = config(&dir, "s.cfg", "mobility.model = static\n");
    for args in [
        vec!["sweep", "--grid", "0.1:0.1:1", "--param", "colour", "--values", "1"],
        vec!["sweep", "--grid", "0.1:0.1:1", "--param", "step", "--values", "5", "--config", s(&static_cfg)],
        vec!["sweep", "--grid", "0.1:0.1:1", "--param", "n_infected", "--values", "2.5"],
        vec!["analytic", "--grid", "1:0:3"],
        vec!["analytic", "--grid", "0.1:0.1:1", "--config", s(&bad_key)],
        vec!["analytic", "--grid", "0.1:0.1:1", "--config", s(&bad_value)],
        vec!["trails", "--config", s(&bad_value)],
        vec!["dump-law", "--config", s(&bad_key)],
        vec!["report", "--warn-threshold", "2"],
        vec!["frobnicate"],
    ] {
        let r = run(&args);
        assert_eq!(r.code, 2, "{args:?}: {}", r.stderr);
    }
}

#[test]
fn trails_follow_the_schema_and_fixed_steps() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "t.cfg", "radius = 100\nmobility.model = rwk\nmobility.step = 20\nmobility.speed = 3\nmc.seed = 5\n");
    let r = run(&["trails", "--config", s(&cfg), "--individuals", "2", "--duration", "300", "--dt", "0.05"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let data = rows(&r.stdout, "trails", "individual,step,t,x,y");
    assert_eq!(data.len(), 2 * 6001);
    let pts: Vec<(f64, f64)> = data.iter().filter(|r| r[0] == "0").map(|r| (f(&r[3]), f(&r[4]))).collect();
    assert!(pts.iter().all(|(x, y)| x.hypot(*y) <= 100.0 + 1e-9));
    // first sample of each run of direction changes marks a turning point
    let dir_of = |a: (f64, f64), b: (f64, f64)| (b.1 - a.1).atan2(b.0 - a.0);
    let mut turns = Vec::new();
    let mut previous_kink = false;
    for k in 1..pts.len() - 1 {
        let kink = (dir_of(pts[k - 1], pts[k]) - dir_of(pts[k], pts[k + 1])).abs() > 1e-6;
        if kink && !previous_kink {
            turns.push(pts[k]);
        }
        previous_kink = kink;
    }
    assert!(turns.len() > 20);
    let tol = 2.0 * 0.05 * 3.0;
    for w in turns.windows(2) {
        let d = (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
        assert!((d - 20.0).abs() <= tol, "turning points {d} m apart");
    }
}

#[test]
fn dumped_laws_are_complete() {
    let r = run(&["dump-law", "--law", "rwp", "--points", "101"]);
    let data = rows(&r.stdout, "dump-law", "x,pdf,cdf");
    assert_eq!(data.len(), 101);
    assert!((f(&data[100][2]) - 1.0).abs() < 1e-6);
    assert_eq!(f(&data[100][0]), 100.0);

    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "n.cfg", "radius = 50\nn_infected = 7\n");
    let r = run(&["dump-law", "--config", s(&cfg), "--law", "nearest", "--points", "11"]);
    let data = rows(&r.stdout, "dump-law", "x,pdf,cdf");
    // nearest of 7 uniform points: F(r) = 1 - (1 - r^2/D^2)^7
    for row in data {
        let x = f(&row[0]) / 50.0;
        assert!((f(&row[2]) - (1.0 - (1.0 - x * x).powi(7))).abs() < 1e-12);
    }
}

#[test]
fn histogram_dump_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "h.cfg", "radius = 100\nmobility.model = rwp\n");
    let args = ["dump-law", "--config", s(&cfg), "--histogram", "10", "--samples", "20000", "--seed", "3"];
    let a = run(&args);
    assert_eq!(a.code, 0, "{}", a.stderr);
    let data = rows(&a.stdout, "dump-law", "bin_lo,bin_hi,count,density");
    assert_eq!(data.len(), 10);
    assert_eq!(data.iter().map(|r| r[2].parse::<u64>().unwrap()).sum::<u64>(), 20000);
    let ks: f64 = a.stderr.trim().strip_prefix("ks = ").unwrap().parse().unwrap();
    assert!(ks < 0.02);
    assert_eq!(run(&args).stdout, a.stdout);
}

#[test]
fn report_flags_high_risk() {
    let dir = TempDir::new().unwrap();
    let hot = config(&dir, "h.cfg", "radius = 20\nn_infected = 20\npath_loss = 2\nvol_threshold = 0.1\ndetention_time = 600\nmc.trials = 5000\n");
    let r = run(&["report", "--config", s(&hot), "--mc", "--seed", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with(&format!("# edge-epirisk v{} report\n[config]\n", edge_epirisk::VERSION)));
    assert!(r.stdout.contains("\nwarn = true\n"));
    assert!(r.stdout.contains("\nwarn_threshold = 0.5\n"));
    assert!(r.stdout.contains("\nagreement = "));
    assert!(r.stderr.contains("warning: infectious probability"));
    // the config section reads back as the same scenario
    let section = r.stdout.split("[config]\n").nth(1).unwrap().split("[analytic]").next().unwrap();
    let echoed = epirisk::scenario::parse_config(section).unwrap();
    assert_eq!(echoed.radius, 20.0);
    assert_eq!(echoed.detention_time, 600.0);
    assert_eq!(echoed.mc.seed, 2);

    let relaxed = run(&["report", "--config", s(&hot), "--warn-threshold", "0.999"]);
    assert!(relaxed.stdout.contains("\nwarn = false\n"));
    assert!(!relaxed.stdout.contains("[mc]"));
}

#[test]
fn randomized_commands_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "r.cfg", "radius = 100\nmobility.model = rwp\nmc.trials = 3000\n");
    let c = s(&cfg);
    for args in [
        vec!["simulate", "--config", c, "--seed", "11", "--workers", "2"],
        vec!["compare", "--config", c, "--seed", "11", "--grid", "1e-3:1e-2:3:log"],
        vec!["trails", "--config", c, "--seed", "11", "--duration", "20"],
        vec!["dump-law", "--config", c, "--seed", "11", "--histogram", "5", "--samples", "5000"],
        vec!["report", "--config", c, "--seed", "11", "--mc"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.code, b.code);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        let other_seed: Vec<&str> = args.iter().map(|a| if *a == "11" { "12" } else { a }).collect();
        assert_ne!(run(&other_seed).stdout, a.stdout, "{args:?}");
    }
}

#[test]
fn numerical_failures_map_to_three() {
    let e = edge_epirisk::CliError::Engine(epirisk::Error::Numerical("x".into()));
    assert_eq!(e.exit_code(), 3);
    let e = edge_epirisk::CliError::Engine(epirisk::Error::Invalid(vec![]));
    assert_eq!(e.exit_code(), 2);
    assert_eq!(edge_epirisk::CliError::CompareFailed { failed: 1, rows: 2 }.exit_code(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn warn_flag_tracks_the_threshold(n in 1u32..40, vth in 1e-3f64..0.2, warn in 0.0f64..1.0) {
        let cfg = ScenarioConfig::static_cell(n, 100.0, 2.5, vth);
        let a = p_inf_static(&cfg).unwrap();
        let r = RiskReport::new(cfg, a, None, warn);
        prop_assert_eq!(r.warn, a.p_inf > warn);
        prop_assert!(r.agreement.is_none());
    }

    #[test]
    fn agreement_is_the_absolute_gap(seed in 0u64..1000) {
        let mut cfg = ScenarioConfig::static_cell(20, 100.0, 2.5, 4e-3);
        cfg.mc.trials = 2000;
        cfg.mc.seed = seed;
        let a = p_inf_static(&cfg).unwrap();
        let m = estimate_p_inf(&cfg, &McOptions::default()).unwrap();
        let r = RiskReport::new(cfg, a, Some(m), 0.5);
        prop_assert_eq!(r.agreement, Some((a.p_inf - m.p_inf_hat).abs()));
    }

    #[test]
    fn compare_rule_is_three_errors_plus_slack(se in 0.0f64..0.1, gap in 0.0f64..0.5) {
        prop_assert_eq!(compare_passes(gap, se), gap <= 3.0 * se + 0.03);
    }
}
