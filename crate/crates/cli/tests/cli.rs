//! End-to-end tests of the binary: exit codes, report shapes, byte
//! determinism, and the documented failure modes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_graphcstar")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(bin())
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn ktheory_of_bouquet3() {
    let out = run(&["ktheory", fixture("bouquet3.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["k0"]["rank"], 0);
    assert_eq!(v["k0"]["torsion"], serde_json::json!([2]));
    assert_eq!(v["k1"]["rank"], 0);
    assert_eq!(v["algebra"], "cuntz_krieger");
}

#[test]
fn ktheory_free_variant() {
    let out = run(&[
        "ktheory",
        fixture("a4.json").to_str().unwrap(),
        "--algebra",
        "free",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["k0"]["rank"], 4);
    assert_eq!(v["k0"]["torsion"], serde_json::json!([]));
    assert_eq!(v["k1"]["rank"], 0);
    assert!(v.get("unit_class").is_none());
}

#[test]
fn validate_flags_a2() {
    let out = run(&["validate", fixture("a2.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["excluded_case"], "A2");
}

#[test]
fn validate_flags_single_loop_and_warns_in_ktheory() {
    let out = run(&["validate", fixture("loop1.json").to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["excluded_case"], "single_loop");

    // The flagged case still computes, with a warning and free groups.
    let out = run(&["ktheory", fixture("loop1.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["k0"]["rank"], 1);
    assert_eq!(v["k1"]["rank"], 1);
    assert!(v["warning"].as_str().is_some());
}

#[test]
fn verify_a4_passes_at_depth_3() {
    let out = run(&[
        "verify",
        fixture("a4.json").to_str().unwrap(),
        "--depth",
        "3",
        "--fp",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["all_pass"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 4);
}

#[test]
fn fp_reports_golden_ratio_for_a4() {
    let out = run(&["fp", fixture("a4.json").to_str().unwrap()]);
    let v = stdout_json(&out);
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((v["eigenvalue"].as_f64().unwrap() - phi).abs() < 1e-10);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn moments_csv_shape_and_catalan_values() {
    let out = run(&[
        "moments",
        fixture("loop1.json").to_str().unwrap(),
        "--edge",
        "e",
        "--upto",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,moment");
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[1], "0,1");
    assert_eq!(lines[3], "2,1");
    assert_eq!(lines[5], "4,2");
    assert_eq!(lines[7], "6,5");
    assert_eq!(lines[2], "1,0");
}

#[test]
fn laws_report_and_samples() {
    let dir = std::env::temp_dir().join("graphcstar_cli_laws");
    std::fs::create_dir_all(&dir).unwrap();
    let samples = dir.join("density.csv");
    let out = run(&[
        "laws",
        fixture("weighted_pair.json").to_str().unwrap(),
        "--edge",
        "e",
        "--samples",
        samples.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["case"], "edge");
    assert_eq!(v["backward"]["atoms"][0][1], 3.0);
    assert_eq!(v["params"]["mu_alpha"], 4.0);
    let csv = std::fs::read_to_string(&samples).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,density");
    assert_eq!(lines.len(), 513);
}

#[test]
fn structure_report_shape() {
    let out = run(&["structure", fixture("weighted_pair.json").to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["a_set"], serde_json::json!(["a"]));
    assert_eq!(v["per_edge"][0]["case"], "unequal_mass");
    assert_eq!(v["intersects_compacts"], true);

    // With the FP weighting the A set empties.
    let out = run(&[
        "structure",
        fixture("a4.json").to_str().unwrap(),
        "--fp",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["a_set"], serde_json::json!([]));
    assert_eq!(v["intersects_compacts"], false);
}

#[test]
fn bratteli_json_and_dot() {
    let dir = std::env::temp_dir().join("graphcstar_cli_dot");
    std::fs::create_dir_all(&dir).unwrap();
    let dot_path = dir.join("a4.dot");
    let out = run(&[
        "bratteli",
        fixture("a4.json").to_str().unwrap(),
        "--variant",
        "zero",
        "--depth",
        "4",
        "--dot",
        dot_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["kind"], "toeplitz_zero_core");
    assert_eq!(v["levels"].as_array().unwrap().len(), 5);
    let dot = std::fs::read_to_string(&dot_path).unwrap();
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches(" -> ").count(), 15);
    assert_eq!(dot.matches("style=").count(), 14);
}

#[test]
fn kms_word_value_on_bouquet2() {
    let out = run(&[
        "kms",
        fixture("bouquet2.json").to_str().unwrap(),
        "--word",
        "S(l0) S*(l0)",
        "--beta",
        "auto",
        "--fp",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["value"], 0.5);
    assert_eq!(v["lambda"], 2.0);
    assert!(v["kms_max_residual"].as_f64().unwrap() <= 1e-10);
    assert!(v["defect_weight_max"].as_f64().unwrap() <= 1e-12);

    // Scalar prefixes and sums.
    let out = run(&[
        "kms",
        fixture("bouquet2.json").to_str().unwrap(),
        "--word",
        "2 S(l0) S*(l0) + -1 P(v)",
        "--fp",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["value"], 0.0);
}

#[test]
fn kms_warns_on_non_fp_weighting() {
    let out = run(&[
        "kms",
        fixture("weighted_pair.json").to_str().unwrap(),
        "--word",
        "P(a)",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!(v["warning"].as_str().unwrap().contains("Frobenius-Perron"));
    // Failure of the FP condition is exactly a nonzero defect weight.
    assert!(v["defect_weight_max"].as_f64().unwrap() > 1e-3);

    // The FP weighting itself never warns.
    let out = run(&[
        "kms",
        fixture("weighted_pair.json").to_str().unwrap(),
        "--word",
        "P(a)",
        "--fp",
    ]);
    let v = stdout_json(&out);
    assert!(v.get("warning").is_none());
}

#[test]
fn kms_off_temperature_has_residual() {
    let out = run(&[
        "kms",
        fixture("bouquet2.json").to_str().unwrap(),
        "--word",
        "P(v)",
        "--beta",
        "0.7931471805599453",
        "--fp",
    ]);
    let v = stdout_json(&out);
    assert!(v["kms_max_residual"].as_f64().unwrap() > 1e-3);
}

#[test]
fn deterministic_bytes() {
    for _ in 0..2 {
        let a = run(&["ktheory", fixture("a4.json").to_str().unwrap()]);
        let b = run(&["ktheory", fixture("a4.json").to_str().unwrap()]);
        assert_eq!(a.stdout, b.stdout);
        let a = run(&["fp", fixture("a4.json").to_str().unwrap()]);
        let b = run(&["fp", fixture("a4.json").to_str().unwrap()]);
        assert_eq!(a.stdout, b.stdout);
        let a = run(&[
            "bratteli",
            fixture("a4.json").to_str().unwrap(),
            "--variant",
            "compressed",
            "--depth",
            "3",
        ]);
        let b = run(&[
            "bratteli",
            fixture("a4.json").to_str().unwrap(),
            "--variant",
            "compressed",
            "--depth",
            "3",
        ]);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn schema_violations_exit_3() {
    let dir = std::env::temp_dir().join("graphcstar_cli_schema");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"version\": 1,").unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let v = stdout_json(&out);
    assert_eq!(v["kind"], "schema");
    assert!(v["error"].as_str().unwrap().contains("line"));

    let wrong_version = dir.join("v9.json");
    std::fs::write(&wrong_version, r#"{"version":9,"vertices":[],"edges":[]}"#).unwrap();
    let out = run(&["validate", wrong_version.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn validation_failures_exit_2_with_report() {
    let out = run(&["directify", fixture("dangling.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let v = stdout_json(&out);
    assert_eq!(v["kind"], "validation");
    let msg = v["error"].as_str().unwrap();
    assert!(msg.contains("ghost"), "{msg}");

    // Weight-dependent command without weights and without --fp.
    let out = run(&[
        "moments",
        fixture("a4.json").to_str().unwrap(),
        "--edge",
        "e1",
        "--upto",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Unknown edge id.
    let out = run(&[
        "moments",
        fixture("a4.json").to_str().unwrap(),
        "--edge",
        "nope",
        "--upto",
        "4",
        "--fp",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn basis_cap_exits_4_with_size() {
    let out = run_env(
        &[
            "verify",
            fixture("bouquet3.json").to_str().unwrap(),
            "--depth",
            "8",
            "--fp",
        ],
        "CSTAR_BASIS_CAP",
        "50",
    );
    assert_eq!(out.status.code(), Some(4));
    let v = stdout_json(&out);
    assert_eq!(v["kind"], "resource");
    assert!(v["error"].as_str().unwrap().contains("50"));
}

#[test]
fn version_names_schemas() {
    let out = run(&["--version"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("graph format v1"), "{text}");
    assert!(text.contains("report schema v1"), "{text}");
}

#[test]
fn output_flag_writes_file() {
    let dir = std::env::temp_dir().join("graphcstar_cli_out");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = run(&[
        "validate",
        fixture("a4.json").to_str().unwrap(),
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["excluded_case"], "none");
}

#[test]
fn directify_lists_op_pairs() {
    let out = run(&["directify", fixture("a2.json").to_str().unwrap()]);
    let v = stdout_json(&out);
    let dedges = v["dedges"].as_array().unwrap();
    assert_eq!(dedges.len(), 2);
    assert_eq!(dedges[0]["id"], "e1.f");
    assert_eq!(dedges[0]["op"], "e1.r");
    assert_eq!(dedges[1]["id"], "e1.r");
    assert_eq!(dedges[1]["op"], "e1.f");
    assert_eq!(dedges[0]["origin"], "e1");

    let out = run(&["directify", fixture("loop1.json").to_str().unwrap()]);
    let v = stdout_json(&out);
    let dedges = v["dedges"].as_array().unwrap();
    assert_eq!(dedges.len(), 1);
    assert_eq!(dedges[0]["op"], "e");
}
