use std::io::BufReader;
use std::process::{Command, Output};

fn forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ranking-forge"))
        .args(args)
        .env_remove("RANKING_FORGE_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn solve_lp_prints_alpha() {
    let o = forge(&["solve-lp", "--k", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("α=0.50347"), "{text}");
    assert!(text.contains("verify: pass"));
}

#[test]
fn solve_lp_export_small_and_streamed() {
    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("k2.mps");
    let o = forge(&["solve-lp", "--k", "2", "--export", small.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("α=0.50000"));
    let summary = ranking_lp::validate_mps(BufReader::new(std::fs::File::open(&small).unwrap())).unwrap();
    assert!(summary.rows > 0);

    let big = dir.path().join("k20.mps");
    let o = forge(&["solve-lp", "--k", "20", "--export", big.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("exported only"));
    ranking_lp::validate_mps(BufReader::new(std::fs::File::open(&big).unwrap())).unwrap();

    assert_eq!(forge(&["solve-lp", "--k", "20"]).status.code(), Some(3));
}

#[test]
fn validate_f_exit_codes() {
    let k3 = data("k3.json");
    assert_eq!(forge(&["validate-f", "--file", &k3, "--expect", "0.503", "--tol", "0.002"]).status.code(), Some(0));
    assert_eq!(forge(&["validate-f", "--file", &k3, "--expect", "0.6", "--tol", "0.002"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"k": 2, "values": [[0.7, 0.6], [0.8, 0.9]]}"#).unwrap();
    assert_eq!(forge(&["validate-f", "--file", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(forge(&["validate-f", "--file", "/nonexistent/t.json"]).status.code(), Some(2));
    let k10 = data("k10.json");
    let o = forge(&["validate-f", "--file", &k10, "--expect", "0.53046", "--tol", "0.005"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_lemmas_reports_zero_violations() {
    let o = forge(&["verify-lemmas", "--max-n", "4", "--exhaustive"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 violations"));
    let o = forge(&["verify-lemmas", "--max-n", "3", "--corpus", "small", "--exhaustive", "--mutate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_lemmas_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.json");
    let o = forge(&["verify-lemmas", "--corpus", "appendix", "--exhaustive", "--json", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["violation_count"], 0);
    assert!(doc["backup_matched_observed"].as_u64().unwrap() > 0);
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--family", "cycle", "--n", "6", "--k", "4", "--trials", "2000", "--seed", "7"];
    let a = forge(&args);
    let b = forge(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let o = forge(&["simulate", "--family", "path", "--n", "4", "--k", "3", "--trials", "100", "--seed", "1", "--exact"]);
    assert!(stdout(&o).contains("exact ratio 7/8"));
    assert_eq!(forge(&["simulate", "--family", "tree", "--n", "4", "--k", "3", "--trials", "10", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(forge(&["simulate", "--family", "path", "--n", "12", "--k", "3", "--trials", "10", "--seed", "1", "--exact"]).status.code(), Some(3));
}

#[test]
fn reproduce_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let o = forge(&["reproduce", "--table1", "--k-max", "3", "--csv", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[3].starts_with("3,0.50347,0.50347,"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [vec!["frobnicate"], vec!["solve-lp", "--k"], vec!["reproduce", "--k-max", "3"], vec![]] {
        let o = forge(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn jobs_flag_and_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_ranking-forge"))
        .args(["solve-lp", "--k", "1"])
        .env("RANKING_FORGE_JOBS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(forge(&["--jobs", "1", "solve-lp", "--k", "1"]).status.code(), Some(0));
}
