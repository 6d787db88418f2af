//! End-to-end checks of the binary: exit codes, output schemas, and
//! byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_anzai"))
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn flip_system(dir: &Path) -> PathBuf {
    write(
        dir,
        "flip.json",
        r#"{
  "base": {"type": "z_inf_shift"},
  "cocycle": {"type": "z_inf", "window": [[0, [-1.0, 0.0]]], "limit": [1.0, 0.0]}
}"#,
    )
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn example_zinf_passes() {
    let out = bin().arg("example-zinf").output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("11 of 11 identities hold"), "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn report_computes_structure_constants() {
    let dir = tempfile::tempdir().unwrap();
    let system = flip_system(dir.path());
    let out = bin().arg("report").arg("--system").arg(&system).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["n_o"], 1);
    assert_eq!(value["m_o"], 2);
    assert_eq!(value["k_o"], 2);
    assert_eq!(value["classification"], "NON_UNIQUE");
}

#[test]
fn report_missing_file_is_input_error() {
    let out = bin()
        .arg("report")
        .arg("--system")
        .arg("/nonexistent/system.json")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_json_is_input_error_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let system = write(dir.path(), "bad.json", "{\"base\": \n garbage}");
    let out = bin().arg("report").arg("--system").arg(&system).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "stderr: {err}");
}

#[test]
fn factorize_golden_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let q = write(
        dir.path(),
        "q.json",
        r#"{"degree": 1, "coeffs": [[1.0, 0.0], [3.0, 0.0], [1.0, 0.0]]}"#,
    );
    let out = bin().arg("factorize").arg("--input").arg(&q).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let residual = value["residual"].as_f64().unwrap();
    assert!(residual < 1e-10, "residual {residual}");
    let root = value["roots"][0][0].as_f64().unwrap();
    assert!((root - (-3.0 - 5.0f64.sqrt()) / 2.0).abs() < 1e-12);
}

#[test]
fn factorize_rejects_nonpositive_input() {
    let dir = tempfile::tempdir().unwrap();
    // |1 - z|² touches zero on the circle.
    let q = write(
        dir.path(),
        "q.json",
        r#"{"degree": 1, "coeffs": [[-1.0, 0.0], [2.0, 0.0], [-1.0, 0.0]]}"#,
    );
    let out = bin().arg("factorize").arg("--input").arg(&q).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not strictly positive"));
}

#[test]
fn diagnose_flags_the_odd_mode() {
    let dir = tempfile::tempdir().unwrap();
    let system = flip_system(dir.path());
    let h = write(
        dir.path(),
        "h.json",
        r#"{"kind": "z_inf", "slots": [[1, {"type": "z_inf", "window": [], "limit": [1.0, 0.0]}]]}"#,
    );
    let out = bin()
        .args(["diagnose", "--schedule", "16,32,64,128", "--grid", "64", "--z-grid", "4"])
        .arg("--system")
        .arg(&system)
        .arg("--observable")
        .arg(&h)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("# verdict=NONCONVERGING"), "{text}");

    let h2 = write(
        dir.path(),
        "h2.json",
        r#"{"kind": "z_inf", "slots": [[2, {"type": "z_inf", "window": [], "limit": [1.0, 0.0]}]]}"#,
    );
    let out = bin()
        .args(["diagnose", "--schedule", "16,32,64,128", "--grid", "64", "--z-grid", "4"])
        .arg("--system")
        .arg(&system)
        .arg("--observable")
        .arg(&h2)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("# verdict=CONVERGING"));
}

#[test]
fn factorize_parametric_over_system_grid() {
    let dir = tempfile::tempdir().unwrap();
    let system = flip_system(dir.path());
    // p(x, z) = 3 + g(x)·z + conj(g)(x)·z⁻¹ with g = 1/2 off zero, 1 at 0.
    let p = write(
        dir.path(),
        "p.json",
        r#"{
  "degree": 1,
  "coeffs": [
    {"type": "z_inf", "window": [[0, [1.0, 0.0]]], "limit": [0.5, 0.0]},
    {"type": "z_inf", "window": [], "limit": [3.0, 0.0]},
    {"type": "z_inf", "window": [[0, [1.0, 0.0]]], "limit": [0.5, 0.0]}
  ]
}"#,
    );
    let out = bin()
        .args(["factorize", "--grid", "8"])
        .arg("--input")
        .arg(&p)
        .arg("--system")
        .arg(&system)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = value["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 18); // window [-8, 8] plus ∞
    for row in rows {
        let residual = row["factorization"]["residual"].as_f64().unwrap();
        assert!(residual < 1e-9);
    }
    assert_eq!(value["bounds_satisfied"], true);
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let system = flip_system(dir.path());
    let run = |threads: &str| {
        let out = bin()
            .args(["verify-ce", "--seed", "42", "--samples", "8"])
            .arg("--system")
            .arg(&system)
            .env("ANZAI_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let a = run("1");
    let b = run("1");
    assert_eq!(a, b);

    // Parallel workers must not change the bytes either.
    let dom = |threads: &str| {
        let out = bin()
            .args(["dominate", "--seed", "7", "--cases", "24"])
            .arg("--system")
            .arg(&system)
            .env("ANZAI_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    let single = dom("1");
    let multi = dom("4");
    assert_eq!(single, multi);
}

#[test]
fn invalid_thread_cap_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let system = flip_system(dir.path());
    let out = bin()
        .arg("report")
        .arg("--system")
        .arg(&system)
        .env("ANZAI_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let system = flip_system(dir.path());
    let target = dir.path().join("report.json");
    let out = bin()
        .arg("report")
        .arg("--system")
        .arg(&system)
        .arg("--out")
        .arg(&target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(value["k_o"], 2);
}

#[test]
fn average_emits_csv_with_both_paths() {
    let dir = tempfile::tempdir().unwrap();
    let system = flip_system(dir.path());
    let h = write(
        dir.path(),
        "h.json",
        r#"{"kind": "z_inf", "slots": [[1, {"type": "z_inf", "window": [], "limit": [1.0, 0.0]}]]}"#,
    );
    let out = bin()
        .args(["average", "--schedule", "50,100"])
        .arg("--system")
        .arg(&system)
        .arg("--observable")
        .arg(&h)
        .arg("--point")
        .arg(r#"{"type":"z_inf","point":{"int":-100}}"#)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines().skip(1);
    assert_eq!(lines.next().unwrap(), "N,birkhoff_re,birkhoff_im,cesaro_re,cesaro_im");
    // Orbit from -100 sees no flip in 50 or 100 steps: both averages are z.
    assert_eq!(lines.next().unwrap(), "50,1,0,1,0");
    assert_eq!(lines.next().unwrap(), "100,1,0,1,0");
}

#[test]
fn expect_matches_golden_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let system = flip_system(dir.path());
    let h = write(
        dir.path(),
        "h.json",
        r#"{"kind": "z_inf", "slots": [
            [0, {"type": "z_inf", "window": [[0, [9.0, 0.0]]], "limit": [2.0, 0.0]}],
            [1, {"type": "z_inf", "window": [], "limit": [4.0, 0.0]}]
        ]}"#,
    );
    let a = write(
        dir.path(),
        "a.json",
        r#"{"k": 2, "entries": [[0.5, 0.0], [0.25, 0.0], [0.25, 0.0], [0.5, 0.0]]}"#,
    );
    let out = bin()
        .arg("expect")
        .arg("--system")
        .arg(&system)
        .arg("--observable")
        .arg(&h)
        .arg("--matrix")
        .arg(&a)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // E_A(h) = (h_0(∞) + a₁₂·h_1(∞)) + a₂₁·h_1(∞)·z²:
    // generator slot 0 ↦ 2 + 0.25·4 = 3, slot 1 ↦ 0.25·4 = 1.
    let coeffs = value["coeffs"].as_array().unwrap();
    assert_eq!(coeffs.len(), 2);
    assert_eq!(coeffs[0][0], 0);
    assert_eq!(coeffs[0][1][0], 3.0);
    assert_eq!(coeffs[1][0], 1);
    assert_eq!(coeffs[1][1][0], 1.0);
}
