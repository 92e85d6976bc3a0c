use std::path::PathBuf;
use std::process::{Command, Output};

use diva_core::io::{read_published, SchemaSpec};
use diva_core::{is_k_anonymous, validate, ConstraintSet};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn diva(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diva")).args(args).output().expect("binary runs")
}

fn arg(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn anonymize(constraints: &str, k: &str, extra: &[&str]) -> Output {
    let (input, schema, sigma) = (arg("medical.csv"), arg("medical_schema.json"), arg(constraints));
    let mut args = vec!["anonymize", "--input", &input, "--schema", &schema, "--constraints", &sigma, "--k", k];
    args.extend_from_slice(extra);
    diva(&args)
}

#[test]
fn anonymize_publishes_valid_relation_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let report = dir.path().join("report.json");
    let o = anonymize(
        "diverse.json",
        "2",
        &["--output", out.to_str().unwrap(), "--report", report.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let spec: SchemaSpec = serde_json::from_str(&std::fs::read_to_string(fixture("medical_schema.json")).unwrap()).unwrap();
    let published = read_published(std::fs::File::open(&out).unwrap(), &spec).unwrap();
    assert!(is_k_anonymous(&published, 2));
    let sigma: ConstraintSet = serde_json::from_str(&std::fs::read_to_string(fixture("diverse.json")).unwrap()).unwrap();
    for c in &sigma {
        assert!(validate(&published, c).unwrap().satisfied, "{c}");
    }

    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    for field in ["disc", "disc_normalized", "info_loss", "constraints"] {
        assert!(json.get(field).is_some(), "missing {field}");
    }
    assert!(json["info_loss"].as_u64().unwrap() <= 26);
    assert_eq!(json["constraints"].as_array().unwrap().len(), 3);
}

#[test]
fn anonymize_is_byte_identical_across_runs() {
    let a = anonymize("diverse.json", "2", &["--strategy", "naive", "--seed", "5"]);
    let b = anonymize("diverse.json", "2", &["--strategy", "naive", "--seed", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn anonymize_unsatisfiable_exits_two() {
    let o = anonymize("african.json", "3", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("unsatisfiable"));
}

#[test]
fn strict_lower_bounds_is_a_config_error() {
    let o = anonymize("african.json", "3", &["--strict-lower-bounds"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("below k"));
}

#[test]
fn config_errors_exit_one_with_distinct_messages() {
    let o = anonymize("diverse.json", "2", &["--strategy", "greedy"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown strategy"));

    let dir = tempfile::tempdir().unwrap();
    let bad_csv = dir.path().join("bad.csv");
    std::fs::write(&bad_csv, "GEN,ETH,AGE,PRV,CTY,DIAG\nMale,*,1,AB,X,Flu\n").unwrap();
    let bad_json = dir.path().join("bad.json");
    std::fs::write(&bad_json, "[{\"attrs\": [\"ETH\"]").unwrap();
    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"[{"attrs": ["ZIP"], "values": ["1"], "lo": 1, "hi": 2}]"#).unwrap();
    let schema = arg("medical_schema.json");
    let mut messages = Vec::new();
    for (input, sigma) in [
        (bad_csv.to_str().unwrap().to_owned(), arg("diverse.json")),
        (arg("medical.csv"), bad_json.to_str().unwrap().to_owned()),
        (arg("medical.csv"), unknown.to_str().unwrap().to_owned()),
    ] {
        let o = diva(&["anonymize", "--input", &input, "--schema", &schema, "--constraints", &sigma, "--k", "2"]);
        assert_eq!(o.status.code(), Some(1));
        messages.push(stderr(&o));
    }
    assert!(messages[0].contains("reserved"));
    assert!(messages[1].contains("json"));
    assert!(messages[2].contains("ZIP"));

    assert_eq!(diva(&["anonymize", "--k", "2"]).status.code(), Some(1));
    assert_eq!(diva(&["--help"]).status.code(), Some(0));
}

#[test]
fn check_implication_verdicts() {
    let o = diva(&["check", "--constraints", &arg("calgary.json"), "--implies", &arg("calgary_implied.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(": implied (inferred [4,10])"));

    let o = diva(&["check", "--constraints", &arg("calgary.json"), "--implies", &arg("calgary_query.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("not implied (inferred [4,10])"));
}

#[test]
fn check_satisfiability_and_cover() {
    let o = diva(&["check", "--constraints", &arg("calgary.json"), "--satisfiable", "--min-cover"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("satisfiable\n"));
    let cover: serde_json::Value = serde_json::from_str(&text["satisfiable\n".len()..]).unwrap();
    assert_eq!(cover.as_array().unwrap().len(), 2);

    let o = diva(&["check", "--constraints", &arg("conflicting.json"), "--satisfiable"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o), "unsatisfiable\n");

    assert_eq!(diva(&["check", "--constraints", &arg("calgary.json")]).status.code(), Some(1));
}

#[test]
fn gen_constraints_writes_json() {
    let o = diva(&[
        "gen-constraints",
        "--input",
        &arg("medical.csv"),
        "--schema",
        &arg("medical_schema.json"),
        "--class",
        "average",
        "--attrs",
        "CTY",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let set: ConstraintSet = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(set.len(), 3);
    assert!(diva_core::is_satisfiable(&set));
}

#[test]
fn synth_round_trips_through_anonymize() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("synth.csv");
    let schema = dir.path().join("schema.json");
    let o = diva(&["synth", "--spec", &arg("synth.json"), "--output", csv.to_str().unwrap(), "--schema-out", schema.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 201);
    assert!(text.starts_with("AGE,CTY,GEN,DIAG\n"));

    let sigma = dir.path().join("sigma.json");
    let o = diva(&[
        "gen-constraints", "--input", csv.to_str().unwrap(), "--schema", schema.to_str().unwrap(),
        "--class", "proportion", "--attrs", "CTY", "--k", "3", "--output", sigma.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = diva(&[
        "anonymize", "--input", csv.to_str().unwrap(), "--schema", schema.to_str().unwrap(),
        "--constraints", sigma.to_str().unwrap(), "--k", "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn bench_emits_fixed_columns_in_sweep_order() {
    let o = diva(&["bench", "--config", &arg("bench.json"), "--jobs", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("instance,k,strategy,n_constraints,conflict_rate,satisfiable,info_loss,disc_norm,millis")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 12);
    let keys: Vec<(&str, &str, &str)> = rows.iter().map(|r| (r[0], r[1], r[2])).collect();
    assert_eq!(keys[0], ("medical", "2", "naive"));
    assert_eq!(keys[5], ("medical", "3", "max-fanout"));
    assert_eq!(keys[6], ("synthetic", "2", "naive"));
    assert_eq!(rows[1][5..8], ["true", "26", "0.200000"]);
    assert_eq!(rows[4][5], "false");
    assert!(rows.iter().all(|r| r.len() == 9));

    let again = diva(&["bench", "--config", &arg("bench.json"), "--jobs", "1"]);
    let strip = |s: &str| s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_owned()).collect::<Vec<_>>();
    assert_eq!(strip(&text), strip(&stdout(&again)));
}
