use std::process::{Command, Output};

fn tribox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tribox")).args(args).output().unwrap()
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(tribox(&["spectrum", "--lmin", "0", "--spacing", "geometric", "--out", out]).status.code(), Some(1));
    assert_eq!(tribox(&["spectrum", "--cutoff", "2", "--out", out]).status.code(), Some(1));
    assert_eq!(tribox(&["spectrum", "--irreps", "B1", "--out", out]).status.code(), Some(1));
    assert_eq!(tribox(&["dump-block", "--irrep", "A1g", "--row", "1"]).status.code(), Some(1));
    assert_eq!(tribox(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(tribox(&["--config", "/nonexistent.json", "pt"]).status.code(), Some(1));
}

#[test]
fn single_slice_at_zero_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = tribox(&["spectrum", "--cutoff", "14", "--irreps", "A1g", "--points", "1", "--lmin", "0", "--lmax", "0", "--spacing", "linear", "--out", out]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("A1g.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "lambda,E_1,E_2,E_3,scaled_1,scaled_2,scaled_3");
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[0], "0.0000000000000000e0");
    let pi2 = std::f64::consts::PI.powi(2) / 4.0;
    for (f, s) in fields[1..4].iter().zip([3.0, 9.0, 11.0]) {
        let e: f64 = f.parse().unwrap();
        assert!((e / (pi2 * s) - 1.0).abs() < 1e-14);
    }
    assert!(fields[4..].iter().all(|f| f.is_empty()));
    assert!(!tmp.path().join("Eu.csv").exists());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    std::fs::write(&cfg, r#"{"cutoff": 6, "points": 3, "spacing": "linear", "lmin": 0, "lmax": 1, "irreps": ["A1g"]}"#).unwrap();
    let out = tmp.path().join("o");
    let o = tribox(&["--config", cfg.to_str().unwrap(), "spectrum", "--points", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["cutoff"], 6);
    assert_eq!(summary["grid"]["points"], 2);
    assert_eq!(summary["irreps"], serde_json::json!(["A1g"]));
}

#[test]
fn pt_passes_and_negative_control_fails() {
    let o = tribox(&["pt"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(!text.contains("FAIL"));

    let o = tribox(&["pt", "--cutoff", "3"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);

    assert_eq!(tribox(&["pt", "--perturb-integrals", "1e-6"]).status.code(), Some(2));
}

#[test]
fn verify_modes() {
    let o = tribox(&["verify", "--quadrature-only"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 1);
    assert_eq!(v["pass"], true);

    let o = tribox(&["verify", "--cutoff", "14", "--lambda", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 1);

    let o = tribox(&["verify"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 10);
}

#[test]
fn basis_and_block_dump_are_json() {
    let o = tribox(&["basis", "--cutoff", "6", "--irreps", "Eu"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[0]["irrep"], "Eu");

    let o = tribox(&["dump-block", "--cutoff", "14", "--irrep", "a2u"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let n = v["basis"].as_array().unwrap().len();
    assert_eq!(v["w"].as_array().unwrap().len(), n);
    assert_eq!(v["h0"].as_array().unwrap().len(), n);
}

#[test]
fn golden_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tribox(&[
        "spectrum", "--cutoff", "14", "--lmin", "0.01", "--lmax", "100", "--points", "5", "--levels", "3", "--irreps", "A1g,Eu", "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let golden = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/small");
    for name in ["A1g.csv", "Eu.csv", "summary.json"] {
        let expect = std::fs::read(golden.join(name)).unwrap();
        let got = std::fs::read(tmp.path().join(name)).unwrap();
        assert!(expect == got, "{name} differs from the snapshot");
    }
}
