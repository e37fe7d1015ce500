use std::path::Path;
use std::process::{Command, Output};

fn gigo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gigo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn bench_writes_one_row_per_cell() {
    let o = gigo(&["bench", "--dims", "2,4", "--algos", "gigo_a,xnes,cma", "--runs", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "algorithm,objective,dim,runs,successes,median_evals,all_premature"
    );
    assert_eq!(lines.len(), 7);
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 7);
        assert_eq!(cols[1], "sphere");
        assert_eq!(cols[3], "3");
    }
}

#[test]
fn bench_output_is_byte_identical_across_runs_and_thread_counts() {
    let args = [
        "bench",
        "--objective",
        "sphere,cigar_tablet",
        "--dims",
        "4",
        "--runs",
        "4",
        "--seed",
        "42",
    ];
    let a = gigo(&[&args[..], &["--jobs", "1"]].concat());
    let b = gigo(&[&args[..], &["--jobs", "4"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bench_reports_cells_without_successes() {
    let o = gigo(&[
        "bench",
        "--objective",
        "rosenbrock",
        "--dims",
        "8",
        "--algos",
        "gigo_a",
        "--runs",
        "4",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    assert_eq!(row, "gigo_a,rosenbrock,8,4,0,,true");
}

#[test]
fn bench_json_format() {
    let o = gigo(&[
        "bench", "--dims", "2", "--algos", "xnes", "--runs", "2", "--format", "json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v[0]["algorithm"], "xnes");
    assert_eq!(v[0]["runs"], 2);
}

#[test]
fn bench_rejects_invalid_dimension() {
    let o = gigo(&["bench", "--objective", "rosenbrock", "--dims", "1"]);
    assert_eq!(code(&o), 1);
    assert!(!o.stderr.is_empty());
}

#[test]
fn cma_trajectory_breaks_down() {
    let o = gigo(&["trajectory", "--algo", "cma", "--dt", "1"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "step,t,mu,sigma,event,marker");
    let last = text.lines().last().unwrap();
    assert!(last.contains(",cma_breakdown,"), "{last}");
    let step: usize = last.split(',').next().unwrap().parse().unwrap();
    assert!(step <= 10);
}

#[test]
fn gigo_trajectory_covers_the_horizon() {
    let o = gigo(&["trajectory", "--dt", "0.5", "--horizon", "5", "--sample-size", "500"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 11);
    assert!(text.lines().skip(1).all(|l| l.contains(",normal,")));
}

#[test]
fn trajectory_rejects_zero_step() {
    assert_eq!(code(&gigo(&["trajectory", "--dt", "0"])), 1);
    assert_eq!(code(&gigo(&["trajectory", "--dt", "-1"])), 1);
}

#[test]
fn critical_dt_values() {
    let o = gigo(&["critical-dt"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let dt = v["dt_cr"].as_f64().unwrap();
    assert!((0.83..=0.85).contains(&dt), "{dt}");

    let doubled = json(&gigo(&["critical-dt", "--k", "8"]));
    assert!((doubled["dt_cr"].as_f64().unwrap() * 2.0 - dt).abs() < 1e-12);

    assert_eq!(code(&gigo(&["critical-dt", "--q0", "0.6"])), 1);
}

#[test]
fn geodesic_step() {
    let o = gigo(&["geodesic", "--mean", "0,0", "--v-sigma", "-0.5,0,0,-0.5", "--dt", "1"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let var = v["cov"][0][0].as_f64().unwrap();
    assert!((var - (-0.5f64).exp()).abs() < 1e-12, "{var}");
    assert_eq!(code(&gigo(&["geodesic", "--mean", "0,0", "--cov", "1,0,0"])), 1);
}

#[test]
fn verify_passes_by_default_and_fails_at_zero_tolerance() {
    let o = gigo(&["verify", "--instances", "3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 8);
    assert!(text.lines().all(|l| l.starts_with("PASS ")));

    let o = gigo(&["verify", "--instances", "3", "--tol", "1e-30"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).lines().any(|l| l.starts_with("FAIL ")));
}

#[test]
fn unwritable_output_exits_with_io_code() {
    let o = gigo(&["critical-dt", "--out", "/nonexistent-dir/out.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let args = ["trajectory", "--horizon", "3", "--sample-size", "200"];
    let to_file = gigo(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert_eq!(code(&to_file), 0);
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), gigo(&args).stdout);
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"critical_dt": {"k": 8, "d": 2}}"#);
    let from_file = json(&gigo(&["--config", &cfg, "critical-dt"]));
    assert_eq!(from_file["k"], 8.0);
    assert_eq!(from_file["d"], 2);
    let overridden = json(&gigo(&["critical-dt", "--config", &cfg, "--k", "4"]));
    assert_eq!(overridden["k"], 4.0);
    assert_eq!(overridden["d"], 2);
}

#[test]
fn bad_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"critical_dt": {"kk": 8}}"#);
    assert_eq!(code(&gigo(&["--config", &cfg, "critical-dt"])), 1);
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&gigo(&["--config", missing.to_str().unwrap(), "critical-dt"])), 2);
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&gigo(&["--help"])), 0);
    assert_eq!(code(&gigo(&["bench", "--help"])), 0);
    assert_eq!(code(&gigo(&["--version"])), 0);
    assert_eq!(code(&gigo(&["bench", "--no-such-flag"])), 1);
    assert_eq!(code(&gigo(&[])), 1);
}
