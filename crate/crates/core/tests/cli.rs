use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polis::economy::EconomyMap;
use polis::estimator::ObjectiveEstimate;
use polis::evolution::read_trace_csv;
use polis::metaheuristics::{read_history_csv, RunSummary};
use polis::TaxPolicy;

fn polis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polis"))
        .args(args)
        .output()
        .expect("spawn polis")
}

fn ok(args: &[&str]) -> String {
    let out = polis(args);
    assert!(
        out.status.success(),
        "polis {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn map_file(dir: &Path) -> PathBuf {
    let path = dir.join("eco.json");
    ok(&[
        "gen-map",
        "--seed",
        "1",
        "--firms",
        "100",
        "--markets",
        "5",
        "--grid",
        "100",
        "-o",
        s(&path),
    ]);
    path
}

#[test]
fn gen_map_writes_counts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let printed = ok(&[
        "gen-map",
        "--seed",
        "1",
        "--firms",
        "100",
        "--markets",
        "5",
        "--grid",
        "100",
        "-o",
        s(&a),
    ]);
    assert_eq!(printed.trim(), s(&a));
    ok(&[
        "gen-map",
        "--seed",
        "1",
        "--firms",
        "100",
        "--markets",
        "5",
        "--grid",
        "100",
        "-o",
        s(&b),
    ]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let map = EconomyMap::load(&a).unwrap();
    assert_eq!((map.n_firms(), map.n_markets()), (100, 5));
}

#[test]
fn gen_map_rejects_zero_markets() {
    let dir = tempfile::tempdir().unwrap();
    let out = polis(&[
        "gen-map",
        "--markets",
        "0",
        "-o",
        s(&dir.path().join("m.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn show_defaults() {
    let text = ok(&["--show-defaults"]);
    assert!(text.contains("max_evaluations"));
    assert!(text
        .lines()
        .any(|l| l.starts_with("n_sim") && l.ends_with("10000")));
}

#[test]
fn simulate_outputs_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let map = map_file(dir.path());
    let run = |out: &Path| {
        ok(&[
            "simulate",
            "--map",
            s(&map),
            "--steps",
            "300",
            "--seed",
            "4",
            "-o",
            s(out),
            "--plot-data",
        ])
    };
    let (o1, o2) = (dir.path().join("r1"), dir.path().join("r2"));
    run(&o1);
    run(&o2);
    let t1 = fs::read(o1.join("trace.csv")).unwrap();
    assert_eq!(t1, fs::read(o2.join("trace.csv")).unwrap());
    assert_eq!(
        fs::read(o1.join("summary.json")).unwrap(),
        fs::read(o2.join("summary.json")).unwrap()
    );

    let trace = read_trace_csv(t1.as_slice()).unwrap();
    assert_eq!(trace.len(), 300);
    assert!(trace
        .iter()
        .all(|r| r.quantities.iter().sum::<u32>() == 100));

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(o1.join("summary.json")).unwrap()).unwrap();
    assert!(summary["objective"].as_f64().unwrap() > 0.0);

    let profit = fs::read_to_string(o1.join("mean_profit.csv")).unwrap();
    assert!(profit.starts_with("t,mean_profit\n"));
    assert_eq!(profit.lines().count(), 301);
}

#[test]
fn simulate_one_step_window() {
    let dir = tempfile::tempdir().unwrap();
    let map = map_file(dir.path());
    let out = dir.path().join("w");
    ok(&[
        "simulate",
        "--map",
        s(&map),
        "--steps",
        "101",
        "--warmup",
        "100",
        "-o",
        s(&out),
    ]);
    let trace = read_trace_csv(fs::File::open(out.join("trace.csv")).unwrap()).unwrap();
    let want = polis::evolution::objective_from_trace(&trace[100..], 0, 100, 5).unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["objective"].as_f64().unwrap(), want);
}

#[test]
fn simulate_with_policy_flags_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let map = map_file(dir.path());
    let policy = dir.path().join("p.json");
    fs::write(
        &policy,
        r#"{"rate":[0.1,0,0,-0.1,0],"fixed":[5,0,0,-5,20]}"#,
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&[
        "simulate",
        "--map",
        s(&map),
        "--steps",
        "150",
        "--policy",
        s(&policy),
        "-o",
        s(&a),
    ]);
    ok(&[
        "simulate",
        "--map",
        s(&map),
        "--steps",
        "150",
        "--rates",
        "0.1,0,0,-0.1,0",
        "--fixed",
        "5,0,0,-5,20",
        "-o",
        s(&b),
    ]);
    assert_eq!(
        fs::read(a.join("trace.csv")).unwrap(),
        fs::read(b.join("trace.csv")).unwrap()
    );

    let out = polis(&[
        "simulate",
        "--map",
        s(&map),
        "--rates",
        "0.3,0,0,0,0",
        "-o",
        s(&a),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_malformed_map_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        "{\"grid_size\": 10,\n \"firms\": [[1,2]],\n \"markets\": [[1, oops]]}\n",
    )
    .unwrap();
    let out = polis(&["simulate", "--map", s(&bad), "-o", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3"), "{err}");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let map = map_file(dir.path());
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"steps": 130, "warmup": 20, "seed": 3}"#).unwrap();
    let out = dir.path().join("c");
    ok(&[
        "simulate",
        "--map",
        s(&map),
        "--config",
        s(&cfg),
        "-o",
        s(&out),
    ]);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["steps"], 130);
    assert_eq!(summary["warmup"], 20);
    assert_eq!(summary["seed"], 3);
    ok(&[
        "simulate",
        "--map",
        s(&map),
        "--config",
        s(&cfg),
        "--steps",
        "140",
        "-o",
        s(&out),
    ]);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["steps"], 140);
    assert_eq!(summary["warmup"], 20);
}

#[test]
fn estimate_single_replicate_and_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let map = map_file(dir.path());
    let one = ok(&[
        "estimate",
        "--map",
        s(&map),
        "--steps",
        "150",
        "--n-sim",
        "1",
        "--seed",
        "2",
    ]);
    let est: ObjectiveEstimate = serde_json::from_str(&one).unwrap();
    assert_eq!((est.n, est.std), (1, 0.0));

    let args = [
        "estimate",
        "--map",
        s(&map),
        "--steps",
        "150",
        "--n-sim",
        "8",
        "--seed",
        "2",
    ];
    let seq = ok(&args);
    let mut par_args = args.to_vec();
    par_args.push("--parallel");
    let par = Command::new(env!("CARGO_BIN_EXE_polis"))
        .args(&par_args)
        .env("POLIS_THREADS", "3")
        .output()
        .unwrap();
    assert!(par.status.success());
    assert_eq!(seq.as_bytes(), par.stdout.as_slice());

    let out = dir.path().join("est.json");
    let mut file_args = args.to_vec();
    file_args.extend(["-o", s(&out)]);
    ok(&file_args);
    assert_eq!(fs::read_to_string(&out).unwrap(), seq);
}

#[test]
fn bad_thread_env_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_polis"))
        .arg("--show-defaults")
        .env("POLIS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn optimize_sa_with_budget_of_one() {
    let dir = tempfile::tempdir().unwrap();
    let map = map_file(dir.path());
    let out = dir.path().join("sa");
    ok(&[
        "optimize",
        "sa",
        "--map",
        s(&map),
        "--steps",
        "120",
        "--n-sim",
        "2",
        "--max-evals",
        "1",
        "-o",
        s(&out),
    ]);
    let summary: RunSummary =
        serde_json::from_str(&fs::read_to_string(out.join("best.json")).unwrap()).unwrap();
    assert_eq!(summary.best_policy, TaxPolicy::zero(5));
    assert_eq!(summary.evaluations, 1);
    let history = read_history_csv(fs::File::open(out.join("history.csv")).unwrap()).unwrap();
    assert_eq!(history.len(), 1);
}

#[test]
fn optimize_sls_history_length() {
    let dir = tempfile::tempdir().unwrap();
    let map = map_file(dir.path());
    let out = dir.path().join("sls");
    ok(&[
        "optimize",
        "sls",
        "--map",
        s(&map),
        "--steps",
        "110",
        "--n-sim",
        "1",
        "--iterations",
        "200",
        "-o",
        s(&out),
    ]);
    let history = read_history_csv(fs::File::open(out.join("history.csv")).unwrap()).unwrap();
    assert_eq!(history.len(), 201);
    assert!(history.iter().all(|h| h.temperature.is_none()));
    let summary: RunSummary =
        serde_json::from_str(&fs::read_to_string(out.join("best.json")).unwrap()).unwrap();
    let min = history
        .iter()
        .map(|h| h.value)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(summary.best_value, min);
}

#[test]
fn optimize_executions_feed_stats() {
    let dir = tempfile::tempdir().unwrap();
    let map = map_file(dir.path());
    let sa = dir.path().join("sa");
    let sls = dir.path().join("sls");
    let common = [
        "--map",
        s(&map),
        "--steps",
        "40",
        "--warmup",
        "10",
        "--n-sim",
        "1",
        "--executions",
        "30",
    ];
    let mut a = vec!["optimize", "sa", "--max-evals", "6"];
    a.extend(common);
    a.extend(["-o", s(&sa)]);
    ok(&a);
    let mut b = vec!["optimize", "sls", "--iterations", "5"];
    b.extend(common);
    b.extend(["-o", s(&sls)]);
    ok(&b);

    let values = fs::read_to_string(sa.join("values.txt")).unwrap();
    assert_eq!(values.lines().count(), 30);
    assert!(sa.join("exec_029/history.csv").exists());

    // executions are reproducible regardless of scheduling
    let again = dir.path().join("again");
    let mut c = vec!["optimize", "sa", "--max-evals", "6"];
    c.extend(common);
    c.extend(["-o", s(&again)]);
    ok(&c);
    assert_eq!(
        values,
        fs::read_to_string(again.join("values.txt")).unwrap()
    );

    let report = ok(&[
        "stats",
        s(&sls.join("values.txt")),
        s(&sa.join("values.txt")),
    ]);
    assert!(report.contains("Sample mean"));
    assert!(report.contains("H0 at alpha"));
}

#[test]
fn stats_reproduces_local_search_block() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let text = ok(&["stats", &data("sls_economy1.txt"), "--json", s(&json)]);
    assert!(text.contains("4.4644"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let sample = &v["samples"][0];
    let close = |x: &serde_json::Value, want: f64| (x.as_f64().unwrap() - want).abs() < 0.01;
    assert!(close(&sample["mean"], 4.464));
    assert!(close(&sample["std"], 0.831));
    assert!(close(&sample["intervals"][0]["hi"], 4.762));
    assert!(close(&sample["intervals"][0]["lo"], 4.167));
    assert!(close(&sample["intervals"][1]["hi"], 4.817));
    assert!(close(&sample["intervals"][1]["lo"], 4.112));
}

#[test]
fn stats_two_files_reject_at_strict_alpha() {
    let text = ok(&[
        "stats",
        &data("sls_economy1.txt"),
        &data("sa_economy1.txt"),
        "--alpha",
        "0.001",
    ]);
    assert!(text.contains("reject H0 at alpha = 0.001"), "{text}");
}

#[test]
fn stats_config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("stats.json");
    fs::write(
        &cfg,
        r#"{"significance": 0.001, "confidence_levels": [0.9]}"#,
    )
    .unwrap();
    let table = dir.path().join("table.txt");
    let files = [data("sls_economy1.txt"), data("sa_economy1.txt")];
    let text = ok(&[
        "stats",
        &files[0],
        &files[1],
        "--config",
        s(&cfg),
        "-o",
        s(&table),
    ]);
    assert!(text.contains("reject H0 at alpha = 0.001"), "{text}");
    assert!(text.contains("90%"), "{text}");
    assert_eq!(fs::read_to_string(&table).unwrap(), text);
    let text = ok(&[
        "stats",
        &files[0],
        &files[1],
        "--config",
        s(&cfg),
        "--alpha",
        "0.2",
    ]);
    assert!(text.contains("alpha = 0.2"), "{text}");
}

#[test]
fn stats_csv_column_and_constant_sample() {
    let text = ok(&[
        "stats",
        &data("fixed_policy_samples.csv"),
        "--column",
        "economy1_set1",
    ]);
    assert!(text.contains("4.0108"), "{text}");

    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.txt");
    fs::write(&flat, "2.5\n2.5\n2.5\n2.5\n").unwrap();
    let json = dir.path().join("flat.json");
    ok(&["stats", s(&flat), "--json", s(&json)]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    for iv in v["samples"][0]["intervals"].as_array().unwrap() {
        assert_eq!(iv["lo"], iv["hi"]);
    }
}

#[test]
fn stats_names_bad_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1.0\n2.0\nthree\n").unwrap();
    let out = polis(&["stats", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.txt:3"));
}
