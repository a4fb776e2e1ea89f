use std::fs;
use std::process::{Command, Output};

fn subcurv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subcurv"))
        .args(args)
        .env_remove("SUBCURV_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn verify_writes_json_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = subcurv(&[
        "verify", "--example", "hopf", "--points", "50", "--seed", "7", "--format", "json", "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["config"]["families"][0], "oneill");
    let records = v["examples"]["hopf"]["identities"]["oneill.HHHH"]["records"]
        .as_array()
        .unwrap();
    assert_eq!(records.len(), 50);
    assert!(records[0]["seed"].is_u64());
    assert_eq!(records[0]["point"].as_array().unwrap().len(), 3);
    assert_eq!(records[0]["verdict"], "exact_as_printed");
}

#[test]
fn unknown_example_is_a_configuration_error() {
    let out = subcurv(&["verify", "--example", "nonexistent"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("nonexistent"));
}

#[test]
fn product_holds_at_a_tight_tolerance() {
    let out = subcurv(&["verify", "--example", "product_s2_s1", "--tolerance", "1e-12"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn impossible_tolerance_exits_one() {
    let out = subcurv(&[
        "verify", "--example", "hopf", "--points", "3", "--tolerance", "1e-300", "--families",
        "oneill",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("both_fail"));
}

#[test]
fn bad_flags_exit_two() {
    for args in [
        &["verify", "--example", "hopf", "--points", "0"][..],
        &["verify", "--example", "hopf", "--tolerance", "-1"],
        &["verify", "--example", "hopf", "--families", "oneill,bogus"],
        &["verify", "--file", "/nonexistent/file.sub"],
        &["verify", "--format", "yaml"],
    ] {
        let out = subcurv(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn reports_are_byte_identical_across_runs_and_threads() {
    for format in ["json", "csv", "text"] {
        let args = [
            "verify", "--example", "hopf", "--example", "warped_interval_s1", "--points", "10",
            "--seed", "3", "--format", format,
        ];
        let a = subcurv(&args);
        let b = Command::new(env!("CARGO_BIN_EXE_subcurv"))
            .args(args)
            .env("SUBCURV_THREADS", "1")
            .output()
            .unwrap();
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
}

#[test]
fn bad_thread_cap_exits_two() {
    let out = Command::new(env!("CARGO_BIN_EXE_subcurv"))
        .args(["verify", "--example", "hopf", "--points", "1"])
        .env("SUBCURV_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn csv_has_one_row_per_record() {
    let out = subcurv(&[
        "verify", "--example", "hopf", "--points", "4", "--families", "oneill,scalar", "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 4 * 7);
}

#[test]
fn text_report_names_the_variant_per_identity() {
    let out = subcurv(&["verify", "--example", "hopf", "--points", "5", "--families", "oneill,scalar"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let line = |label: &str| {
        text.lines()
            .find(|l| l.trim_start().starts_with(label))
            .unwrap_or_else(|| panic!("no line for {label}:\n{text}"))
            .to_string()
    };
    assert!(line("oneill.HHHH").contains("as printed"));
    assert!(line("oneill.HVHV").contains("corrected"));
    assert!(line("scalar").contains("block"));
}

#[test]
fn exported_examples_validate_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["hopf", "product_s2_s1", "warped_interval_s1", "flat_torus_quotient"] {
        let path = dir.path().join(format!("{name}.sub"));
        let p = path.to_str().unwrap();
        let out = subcurv(&["export-example", name, "-o", p]);
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
        let out = subcurv(&["validate", p]);
        assert_eq!(code(&out), 0, "{name}: {}", stdout(&out));
        assert!(stdout(&out).contains("(S1)"));
        let out = subcurv(&["verify", "--file", p, "--points", "3"]);
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
    }
}

#[test]
fn export_without_output_prints_the_definition() {
    let out = subcurv(&["export-example", "hopf"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("name = hopf"));
}

#[test]
fn export_errors_exit_two() {
    let out = subcurv(&["export-example", "nonexistent"]);
    assert_eq!(code(&out), 2);
    let out = subcurv(&["export-example", "hopf", "-o", "/nonexistent/dir/hopf.sub"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("io error"));
}

#[test]
fn rank_drop_fails_validation_naming_s1() {
    let dir = tempfile::tempdir().unwrap();
    let hopf = stdout(&subcurv(&["export-example", "hopf"]));
    let pinched: String = hopf
        .lines()
        .map(|l| if l.starts_with("pi =") { "pi = (θ, 0*φ)" } else { l })
        .collect::<Vec<_>>()
        .join("\n");
    let path = dir.path().join("pinched.sub");
    fs::write(&path, pinched).unwrap();
    let out = subcurv(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let failing: Vec<_> = stdout(&out).lines().filter(|l| l.contains("FAIL")).map(String::from).collect();
    assert!(failing.iter().any(|l| l.contains("(S1)")), "{failing:?}");
}

#[test]
fn malformed_file_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.sub");
    fs::write(
        &path,
        "name = bad\ntotal {\n  coords = (x, y)\n  g = [[1, 0], [0, 1 + * x]]\n}\n",
    )
    .unwrap();
    let out = subcurv(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("line 4") && err.contains("column"), "{err}");
}
