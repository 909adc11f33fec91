use std::path::Path;
use std::process::{Command, Output};

fn pertlag(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pertlag"))
        .args(args)
        .env("PERTLAG_CACHE_DIR", cache)
        .output()
        .expect("spawn pertlag")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn moments_classical_factorials() {
    let dir = tempfile::tempdir().unwrap();
    let o = pertlag(&["moments", "--alpha", "1", "--t", "0", "--jmax", "5"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let values: Vec<&str> = doc["values"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(values, ["1", "2", "6", "24", "120", "720"]);
}

#[test]
fn moments_oracle_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = pertlag(&["moments", "--alpha", "0.5", "--t", "1", "--jmin", "-2", "--jmax", "3", "--oracle"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let diffs = doc["oracle_rel_diff"].as_array().unwrap();
    assert_eq!(diffs.len(), 6);
    for d in diffs {
        let d: f64 = d.as_str().unwrap().parse().unwrap();
        assert!(d < 1e-25, "oracle disagreement {d}");
    }
}

#[test]
fn invalid_alpha_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = pertlag(&["moments", "--alpha", "0", "--t", "0", "--jmax", "3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpha must be > 0"));
    let o = pertlag(&["det", "--alpha", "1", "--t", "-1", "--n", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn det_classical_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = pertlag(&["det", "--alpha", "1", "--t", "0", "--n", "2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "D_n").unwrap();
    let d: f64 = row[col].parse().unwrap();
    assert!((d - 2.0).abs() < 1e-15, "D_2 = {d}");
}

#[test]
fn coeffs_classical_beta_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = pertlag(&["coeffs", "--alpha", "1", "--t", "0", "--n", "4", "--format", "json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 4);
    let beta: Vec<&str> = rows.iter().map(|r| r["beta_n"].as_str().unwrap()).collect();
    assert_eq!(beta, ["", "2", "6", "12"]);
}

#[test]
fn out_file_gets_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("det.csv");
    let o = pertlag(&["det", "--alpha", "2", "--t", "0.5", "--n", "3,6", "--out", out.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 3);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("det.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["command"], "det");
    assert_eq!(manifest["cells"].as_array().unwrap().len(), 2);
}

#[test]
fn painleve_cache_hit_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let args = ["painleve", "--alpha", "1", "--s-max", "50", "--out", out.to_str().unwrap()];
    let first = pertlag(&args, dir.path());
    assert!(first.status.success(), "{}", stderr(&first));
    assert!(stdout(&first).contains("cache miss"));
    let bytes = std::fs::read(&out).unwrap();
    let second = pertlag(&args, dir.path());
    assert!(stdout(&second).contains("cache hit"));
    assert_eq!(bytes, std::fs::read(&out).unwrap());
    assert!(stdout(&second).contains("r(0+) = -3.75"));
}

#[test]
fn painleve_corrupt_cache_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["painleve", "--alpha", "2", "--s-max", "20"];
    let first = pertlag(&args, dir.path());
    assert!(first.status.success());
    let entry = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    std::fs::write(&entry, "{ not json").unwrap();
    let second = pertlag(&args, dir.path());
    assert!(second.status.success(), "{}", stderr(&second));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn painleve_tail_check_at_large_s() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let o = pertlag(&["painleve", "--alpha", "2", "--s-max", "1e4", "--out", out.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("tail_check PASS"), "{}", stdout(&o));
}

#[test]
fn verify_finite_n_passes_and_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.csv");
    let o = pertlag(
        &["verify", "--suite", "finite-n", "--alpha", "2.5", "--n", "5,8", "--t", "0.4,1", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("v.csv.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["suite"], "finite-n");
    assert!(!summary["checks"].as_array().unwrap().is_empty());
}

#[test]
fn verify_asymptotics_fixed_t() {
    let dir = tempfile::tempdir().unwrap();
    let o = pertlag(&["verify", "--suite", "asymptotics", "--alpha", "1", "--n", "10,20,40", "--fixed-t", "0.5"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("quantity,regime,n,t,s,"));
}

#[test]
fn verify_failure_exits_with_code_5() {
    let dir = tempfile::tempdir().unwrap();
    // At alpha = 1 the large-s beta form is still 15% off at s = 1000.
    let o = pertlag(&["verify", "--suite", "transitions", "--alpha", "1"], dir.path());
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    assert!(stderr(&o).contains("FAIL large-s beta_n"));
}

#[test]
fn verify_requires_one_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let o = pertlag(&["verify", "--suite", "asymptotics", "--alpha", "1", "--n", "10,20"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
