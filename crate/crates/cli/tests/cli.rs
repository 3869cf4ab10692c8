use std::path::Path;
use std::process::{Command, Output};

fn gapforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gapforge")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn generate(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut args = vec!["generate"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", &path]);
    let o = gapforge(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn generate_then_certify_single_finite() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "i.json", &["--family", "single-finite", "--m", "5", "--scale", "10"]);
    let o = gapforge(&["certify", &p]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("primal 0") && out.contains("dual 10"), "{out}");
}

#[test]
fn certify_single_infinite_message() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "inf.json", &["--family", "single-inf", "--m", "4", "--scale", "10"]);
    let o = gapforge(&["certify", &p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("dual infeasible (weakly infeasible); gap = +inf"));
}

#[test]
fn certify_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "d.json", &["--family", "double", "--m", "3"]);
    let o = gapforge(&["certify", &p, "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["values"]["primal"], "0");
    assert_eq!(v["values"]["dual"], "1");
    assert_eq!(v["matches_known_gap"], true);
}

#[test]
fn canonicalize_messy_small() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(
        dir.path(),
        "s.json",
        &["--family", "small", "--scale", "10", "--mess-seed", "3", "--mess-ops", "8"],
    );
    let o = gapforge(&["canonicalize", &p]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    for key in ["Lambda", "Sigma", "s = ", "M-norm", "c2'", "gap"] {
        assert!(out.contains(key), "{key} missing in {out}");
    }
    let o = gapforge(&["canonicalize", &p, "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "canonical-form");
    assert!((v["certificate"]["dual"].as_f64().unwrap() - 10.0).abs() < 1e-6);
}

#[test]
fn canonicalize_needs_two_constraints() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "s3.json", &["--family", "single-finite", "--m", "3"]);
    assert_eq!(gapforge(&["canonicalize", &p]).status.code(), Some(1));
}

#[test]
fn singdeg_and_claimcheck() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "s.json", &["--family", "single-finite", "--m", "4", "--scale", "10"]);
    let o = gapforge(&["singdeg", &p, "--which", "D", "--bounds"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("d(D) = 3 (Theorem)"), "{}", stdout(&o));

    let p = generate(dir.path(), "d.json", &["--family", "double", "--m", "2"]);
    let o = gapforge(&["singdeg", &p, "--which", "HD", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], 2);
    let o = gapforge(&["claimcheck", &p, "--trials", "50", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("50/50"));
}

#[test]
fn probe_reports_distance() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "inf.json", &["--family", "single-inf", "--m", "2", "--scale", "10"]);
    let o = gapforge(&["probe", &p, "--iters", "2000", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["final_distance"].as_f64().unwrap() < 1e-6);
}

#[test]
fn exports() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "small.json", &["--family", "small"]);
    assert_eq!(gapforge(&["export", &p, "--format", "sedumi"]).status.code(), Some(0));
    assert!(dir.path().join("small_A.txt").exists() && dir.path().join("small_load.m").exists());
    assert_eq!(gapforge(&["export", &p, "--format", "sdpa"]).status.code(), Some(0));
    let sdpa = std::fs::read_to_string(dir.path().join("small.dat-s")).unwrap();
    assert!(sdpa.contains("= mDIM"));
    let o = gapforge(&["export", &p, "--format", "json"]);
    assert_eq!(stdout(&o), std::fs::read_to_string(&p).unwrap());
}

#[test]
fn library_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lib");
    let o = gapforge(&["library", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("wrote 40 instances"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["entries"].as_array().unwrap().len(), 40);
    // every clean library instance certifies with exit code 0
    for e in manifest["entries"].as_array().unwrap() {
        let name = e["name"].as_str().unwrap();
        if name.contains("_clean_") && e["m"].as_u64().unwrap() <= 4 {
            let path = out.join(e["json"].as_str().unwrap());
            assert_eq!(gapforge(&["certify", path.to_str().unwrap()]).status.code(), Some(0), "{name}");
        }
    }
}

#[test]
fn usage_and_io_errors_exit_one() {
    assert_eq!(gapforge(&["bogus"]).status.code(), Some(1));
    assert_eq!(gapforge(&["certify"]).status.code(), Some(1));
    assert_eq!(gapforge(&["certify", "/nonexistent/x.json"]).status.code(), Some(1));
    assert_eq!(gapforge(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_file_exits_one_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n \"version\": 1,\n \"m\": }").unwrap();
    let o = gapforge(&["certify", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn recorded_gap_mismatch_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "s.json", &["--family", "small", "--scale", "10"]);
    let text = std::fs::read_to_string(&p).unwrap().replace("\"dual\": \"10\"", "\"dual\": \"11\"");
    std::fs::write(&p, text).unwrap();
    assert_eq!(gapforge(&["certify", &p]).status.code(), Some(3));
}
