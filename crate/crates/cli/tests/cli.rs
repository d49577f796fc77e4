use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cstar(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cstar")).args(args).current_dir(dir).output().expect("spawn cstar")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_idempotent(dir: &Path) {
    fs::write(dir.join("idempotent.rel"), "var x;\nrel x x = x;\n").unwrap();
    fs::write(dir.join("x_half.mat"), "dim 1 vars 1\nx\n0.5\n").unwrap();
    fs::write(dir.join("x_proj.mat"), "dim 2 vars 1\nx\n1 0\n0 0\n").unwrap();
}

#[test]
fn check_reports_residual_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    write_idempotent(dir.path());
    let o = cstar(&["check", "idempotent.rel", "x_half.mat"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("0.25"), "{}", stdout(&o));

    let o = cstar(&["check", "idempotent.rel", "x_proj.mat"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn tolerance_override_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("near.rel"), "var x;\nrel x = 0;\n").unwrap();
    fs::write(dir.path().join("near.mat"), "dim 1 vars 1\nx\n1e-6\n").unwrap();
    assert_eq!(cstar(&["check", "near.rel", "near.mat"], dir.path()).status.code(), Some(1));
    assert_eq!(cstar(&["check", "near.rel", "near.mat", "--tol-eq", "1e-5"], dir.path()).status.code(), Some(0));
}

#[test]
fn parse_errors_exit_3_with_position() {
    let dir = tempfile::tempdir().unwrap();
    write_idempotent(dir.path());
    fs::write(dir.path().join("bad.rel"), "var x;\nrel x x - = 0;\n").unwrap();
    let o = cstar(&["check", "bad.rel", "x_half.mat"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("bad.rel:2:"));

    fs::write(dir.path().join("bad.mat"), "dim 2 vars 1\nx\n1 0\n0\n").unwrap();
    assert_eq!(cstar(&["check", "idempotent.rel", "bad.mat"], dir.path()).status.code(), Some(3));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cstar(&["check"], dir.path()).status.code(), Some(2));
    assert_eq!(cstar(&["experiment", "expnorm"], dir.path()).status.code(), Some(2));
    assert_eq!(cstar(&["experiment", "expnorm", "--seed", "1", "--dim", "513"], dir.path()).status.code(), Some(2));
    assert_eq!(cstar(&["experiment", "expnorm", "--seed", "1", "--tol-eq", "0"], dir.path()).status.code(), Some(2));
    assert_eq!(cstar(&["check", "missing.rel", "missing.mat"], dir.path()).status.code(), Some(2));
}

#[test]
fn expnorm_experiment_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = cstar(&["experiment", "expnorm", "--dim", "6", "--count", "1000", "--seed", "7"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["id"], "expnorm");
    assert_eq!(v["samples"], 1000);
    assert!(v["max_violation"].as_f64().unwrap() <= 1e-9);
    for key in ["params", "worst_seed", "runtime_ms"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a.jsonl", "b.jsonl"] {
        let o = cstar(&["experiment", "commutator", "--seed", "11", "--budget", "2000", "--out", out], dir.path());
        assert_eq!(o.status.code(), Some(0));
    }
    let a = fs::read(dir.path().join("a.jsonl")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, fs::read(dir.path().join("b.jsonl")).unwrap());
}

#[test]
fn violations_exit_1_unless_expected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("frac.rel"), "var x positive;\nvar y hermitian;\nrel x^(1/3) y x^(2/3) >= 0;\n").unwrap();
    let args = ["experiment", "positivity", "--rel", "frac.rel", "--seed", "3", "--count", "50"];
    assert_eq!(cstar(&args, dir.path()).status.code(), Some(1));
    let mut expected = args.to_vec();
    expected.push("--expect-violation");
    assert_eq!(cstar(&expected, dir.path()).status.code(), Some(0));

    let o = cstar(&["experiment", "monotone", "--power", "2", "--seed", "3", "--count", "200"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["expect_violation"], true);
    assert!(v["max_violation"].as_f64().unwrap() > 0.0);
}

#[test]
fn approx_writes_residual_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("torus.rel"), "var u;\nvar v;\nrel norm(u v - v u) <= 1;\n").unwrap();
    let o = cstar(
        &["approx", "torus.rel", "--model", "shift,diagonal:harmonic", "--dim", "16", "--schedule", "4,8,16", "--out", "c.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("c.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["rank", "id", "residual", "alpha", "quasicentrality_defect"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[2][0], "16");
    assert_eq!(rows[2][3].parse::<f64>().unwrap(), 1.0);

    let o = cstar(&["approx", "torus.rel", "--model", "shift", "--dim", "16"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = cstar(&["approx", "torus.rel", "--model", "shift,nope", "--dim", "16"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reproduce_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = cstar(&["reproduce", "--out", "suite.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("experiments passed"));
    let lines = fs::read_to_string(dir.path().join("suite.jsonl")).unwrap();
    for line in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["passed"], true, "{line}");
    }
}
