//! End-to-end tests of the binary: spec files in, documents out, exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kobalab"))
}

fn write_fixture(dir: &std::path::Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn fixtures() -> (tempdir::TempDirGuard, PathBuf, PathBuf, PathBuf) {
    let dir = tempdir::tmp();
    let ball = write_fixture(
        &dir.0,
        "ball.json",
        r#"{"type":"ball","center":[[0,0],[0,0]],"radius":1.0}"#,
    );
    let bidisk = write_fixture(
        &dir.0,
        "bidisk.json",
        r#"{"type":"polydisk","center":[[0,0],[0,0]],"radii":[1.0,1.0]}"#,
    );
    let poly = write_fixture(
        &dir.0,
        "p24.json",
        r#"{"dim":2,"terms":[{"alpha":[1,0],"beta":[1,0],"re":"1","im":"0"},
                             {"alpha":[0,2],"beta":[0,2],"re":"1","im":"0"}]}"#,
    );
    (dir, ball, bidisk, poly)
}

// minimal self-cleaning temp dir so the test leaves nothing behind
mod tempdir {
    use std::path::PathBuf;

    pub struct TempDirGuard(pub PathBuf);

    impl Drop for TempDirGuard {
        fn drop(&mut self) {
            let _ = std::fs::remove_dir_all(&self.0);
        }
    }

    pub fn tmp() -> TempDirGuard {
        use std::sync::atomic::{AtomicU64, Ordering};
        static COUNTER: AtomicU64 = AtomicU64::new(0);
        let unique = COUNTER.fetch_add(1, Ordering::Relaxed);
        let dir = std::env::temp_dir().join(format!(
            "kobalab-cli-test-{}-{unique}",
            std::process::id()
        ));
        std::fs::create_dir_all(&dir).unwrap();
        TempDirGuard(dir)
    }
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn distance_document_contains_oracle_value() {
    let (_guard, ball, _, _) = fixtures();
    let out = run_ok(bin().args([
        "distance",
        "--domain",
        ball.to_str().unwrap(),
        "--p",
        "[[0,0],[0,0]]",
        "--q",
        "[[0.5,0],[0,0]]",
    ]));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["command"], "distance");
    assert_eq!(doc["seed"], 0);
    assert!(doc["config"]["domain"].is_string());
    let (lower, upper) = (
        doc["result"]["lower"].as_f64().unwrap(),
        doc["result"]["upper"].as_f64().unwrap(),
    );
    let exact = 0.549306144334055;
    assert!(lower <= exact && exact <= upper, "[{lower}, {upper}]");
}

#[test]
fn degenerate_distance_is_zero_bracket() {
    let (_guard, ball, _, _) = fixtures();
    let out = run_ok(bin().args([
        "distance",
        "--domain",
        ball.to_str().unwrap(),
        "--p",
        "[[0.5,0],[0,0]]",
        "--q",
        "[[0.5,0],[0,0]]",
    ]));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["result"]["lower"], 0.0);
    assert_eq!(doc["result"]["upper"], 0.0);
}

#[test]
fn multitype_document_matches_example() {
    let (_guard, _, _, poly) = fixtures();
    let out = run_ok(bin().args(["multitype", "--poly", poly.to_str().unwrap()]));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["result"]["m"], serde_json::json!([2, 4]));
    assert_eq!(doc["result"]["adapted"], true);
    assert_eq!(doc["result"]["limit"]["terms"].as_array().unwrap().len(), 2);
}

#[test]
fn output_bytes_are_deterministic_for_fixed_config() {
    let (_guard, ball, _, _) = fixtures();
    let args = [
        "hyperbolicity",
        "--domain",
        ball.to_str().unwrap(),
        "--points",
        "120",
        "--kmin",
        "2",
        "--kmax",
        "4",
        "--seed",
        "11",
    ];
    let a = run_ok(bin().args(args)).stdout;
    let b = run_ok(bin().args(args)).stdout;
    assert_eq!(a, b);
    let doc: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(doc["seed"], 11);
    assert_eq!(doc["result"]["seed"], 11);
}

#[test]
fn csv_rows_flatten_per_scale() {
    let (_guard, ball, _, _) = fixtures();
    let out = run_ok(bin().args([
        "hyperbolicity",
        "--domain",
        ball.to_str().unwrap(),
        "--points",
        "60",
        "--kmin",
        "2",
        "--kmax",
        "4",
        "--format",
        "csv",
    ]));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# version="));
    assert!(text.contains("# command=hyperbolicity"));
    assert!(text.contains("k,delta_lower,delta_upper_estimate,triples"));
    // one row per scale k = 2, 3, 4
    let data_rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(data_rows, 1 + 3);
}

#[test]
fn exit_codes_follow_error_classes() {
    let (_guard, ball, bidisk, _) = fixtures();
    // 2: unreadable spec
    let out = bin()
        .args(["distance", "--domain", "/nonexistent.json", "--p", "[[0,0]]", "--q", "[[0,0]]"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // 3: precondition violation (point outside)
    let out = bin()
        .args([
            "distance",
            "--domain",
            ball.to_str().unwrap(),
            "--p",
            "[[5,0],[0,0]]",
            "--q",
            "[[0,0],[0,0]]",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    // 4: witness budget exhausted, partial results still written
    let out = bin()
        .args([
            "witness",
            "--domain",
            bidisk.to_str().unwrap(),
            "--o",
            "[[0,0],[0,0]]",
            "--x",
            "[[0,0],[1,0]]",
            "--y",
            "[[1,0],[1,0]]",
            "--m",
            "50",
            "--doublings",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["result"]["reached"], false);
    assert_eq!(doc["result"]["history"].as_array().unwrap().len(), 2);
}

#[test]
fn witness_succeeds_within_budget() {
    let (_guard, _, bidisk, _) = fixtures();
    let out = run_ok(bin().args([
        "witness",
        "--domain",
        bidisk.to_str().unwrap(),
        "--o",
        "[[0,0],[0,0]]",
        "--x",
        "[[0,0],[1,0]]",
        "--y",
        "[[1,0],[1,0]]",
        "--m",
        "1",
        "--doublings",
        "8",
    ]));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["result"]["reached"], true);
    assert!(doc["result"]["defect"]["defect_lower"].as_f64().unwrap() > 1.0);
}

#[test]
fn linetype_and_mconvex_commands() {
    let (_guard, ball, _, _) = fixtures();
    let out = run_ok(bin().args([
        "linetype",
        "--domain",
        ball.to_str().unwrap(),
        "--x",
        "[[1,0],[0,0]]",
    ]));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["result"]["kind"], "finite");
    assert_eq!(doc["result"]["value"], 2);

    let out = run_ok(bin().args([
        "mconvex",
        "--domain",
        ball.to_str().unwrap(),
        "--m",
        "2",
        "--samples",
        "400",
    ]));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["result"]["escaping"], false);
    assert!(doc["result"]["c_est"].as_f64().unwrap() <= 2.0);
}

#[test]
fn hausdorff_and_blowup_commands() {
    let (_guard, ball, _, _) = fixtures();
    let dir = ball.parent().unwrap();
    let big = write_fixture(dir, "big.json", r#"{"type":"ball","center":[[0,0],[0,0]],"radius":1.1}"#);
    let out = run_ok(bin().args([
        "hausdorff",
        "--domain",
        ball.to_str().unwrap(),
        "--other",
        big.to_str().unwrap(),
        "--radius",
        "3.0",
    ]));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let d = doc["result"]["distance"].as_f64().unwrap();
    let res = doc["result"]["resolution"].as_f64().unwrap();
    assert!((d - 0.1).abs() <= res);

    let out = run_ok(bin().args([
        "blowup",
        "--domain",
        ball.to_str().unwrap(),
        "--xi",
        "[[1,0],[0,0]]",
        "--direction",
        "[[-1,0],[0,0]]",
        "--steps",
        "3",
        "--format",
        "csv",
    ]));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("n,tau_0,tau_1,hausdorff,resolution"));
}

#[test]
fn continuity_command_reports_gaps() {
    let (_guard, ball, _, _) = fixtures();
    let dir = ball.parent().unwrap();
    let b2 = write_fixture(dir, "b2.json", r#"{"type":"ball","center":[[0,0],[0,0]],"radius":1.5}"#);
    let b3 = write_fixture(dir, "b3.json", r#"{"type":"ball","center":[[0,0],[0,0]],"radius":1.25}"#);
    let seq = format!("{},{}", b2.display(), b3.display());
    let out = run_ok(bin().args([
        "continuity",
        "--sequence",
        &seq,
        "--limit",
        ball.to_str().unwrap(),
        "--probes",
        "[[[[0,0],[0,0]],[[0.5,0],[0,0]]]]",
    ]));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["result"]["max_terminal_gap"].as_f64().unwrap() > 0.0);
}
