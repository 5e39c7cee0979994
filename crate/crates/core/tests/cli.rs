mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::fixture;
use serde_json::Value;

fn blond(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blond")).args(args).env_remove("BLOND_PROFILE_DIR").output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn worked_args(extra: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = vec![
        "score".into(),
        "--candidate".into(),
        fixture("worked_cand.jsonl").display().to_string(),
        "--reference".into(),
        fixture("worked_ref.jsonl").display().to_string(),
    ];
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn run_owned(args: &[String]) -> Output {
    blond(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_csv(dir: &Path, name: &str, rows: &[(&str, f64)]) -> PathBuf {
    let p = dir.join(name);
    let mut s = String::from("doc_id,score\n");
    for (id, v) in rows {
        s.push_str(&format!("{id},{v}\n"));
    }
    fs::write(&p, s).unwrap();
    p
}

#[test]
fn score_json_defaults_to_blond() {
    let out = run_owned(&worked_args(&[]));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let variant = &v["variants"][0];
    assert_eq!(variant["variant"], "blond");
    let total = variant["documents"][0]["total"].as_f64().unwrap();
    assert!((total - 1.8340565948099057).abs() < 1e-12);
    assert_eq!(variant["summary"]["n_docs"], 1);
    assert_eq!(variant["summary"]["variance"], 0.0);
}

#[test]
fn score_accepts_aliases_and_several_variants() {
    let out = run_owned(&worked_args(&["--variant", "bd,dbd,dbd-d"]));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let names: Vec<&str> = v["variants"].as_array().unwrap().iter().map(|x| x["variant"].as_str().unwrap()).collect();
    assert_eq!(names, ["blond", "dblond", "dblond-d"]);
}

#[test]
fn score_tsv_and_pretty() {
    let tsv = stdout(&run_owned(&worked_args(&["--variant", "blond", "--output", "tsv"])));
    let mut lines = tsv.lines();
    assert_eq!(lines.next().unwrap(), "doc_id\tvariant\ttotal\tlp\t1g\t2g\t3g\t4g\tE\tV\tP");
    let row: Vec<&str> = lines.next().unwrap().split('\t').collect();
    assert_eq!(&row[..4], ["wang", "blond", "1.8341", "1.0000"]);
    assert_eq!(row[8], "1.0000");
    assert!(lines.next().unwrap().starts_with("#summary\tblond\tmean=1.8341"));

    let pretty = stdout(&run_owned(&worked_args(&["--variant", "blond,dblond-d", "--output", "pretty"])));
    assert!(pretty.contains("1.83"), "{pretty}");
    assert!(pretty.contains("86.15"), "{pretty}");
    assert!(pretty.lines().last().unwrap().starts_with("mean (var)"));
}

#[test]
fn plus_variant_without_ambiguity_is_rejected() {
    let out = run_owned(&worked_args(&["--variant", "blond+"]));
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(stderr(&out).contains("ambiguity"), "{}", stderr(&out));
}

#[test]
fn unknown_variant_is_a_validation_error() {
    let out = run_owned(&worked_args(&["--variant", "bleu"]));
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_input_is_an_io_error() {
    let out = blond(&["score", "--candidate", "/nonexistent/c.jsonl", "--reference", "/nonexistent/r.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(stderr(&out).contains("/nonexistent/c.jsonl"));
}

#[test]
fn malformed_input_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "{\"doc_id\":\"x\",\"sentences\":[[]]}\n").unwrap();
    let out = blond(&["score", "--candidate", path(&bad), "--reference", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn doc_id_mismatch_between_corpora_fails() {
    let mut args = worked_args(&[]);
    args[4] = fixture("sensitivity_ref.jsonl").display().to_string();
    let out = run_owned(&args);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("wang") && err.contains("station"), "{err}");
}

#[test]
fn alpha_override_changes_distances() {
    let get = |extra: &[&str]| {
        let out = run_owned(&worked_args(&[&["--variant", "dblond-d"], extra].concat()));
        let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
        v["variants"][0]["documents"][0]["components"]["P"]["value"].as_f64().unwrap()
    };
    assert!((get(&[]) - std::f64::consts::SQRT_2).abs() < 1e-12);
    assert!((get(&["--alpha", "1"]) - 2.0).abs() < 1e-12);
    let out = run_owned(&worked_args(&["--alpha", "0"]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn profiles_by_path_and_by_name() {
    let profiles = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("profiles");
    let by_path = run_owned(&worked_args(&["--profile", path(&profiles.join("en.toml"))]));
    let builtin = run_owned(&worked_args(&["--profile", "en"]));
    assert_eq!(by_path.status.code(), Some(0), "{}", stderr(&by_path));
    assert_eq!(by_path.stdout, builtin.stdout);

    let out = Command::new(env!("CARGO_BIN_EXE_blond"))
        .args(worked_args(&["--profile", "de"]))
        .env("BLOND_PROFILE_DIR", &profiles)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let out = run_owned(&worked_args(&["--profile", "xx"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dump_counts_to_stdout_and_file() {
    let mut args = worked_args(&[]);
    args[0] = "dump-counts".into();
    let out = run_owned(&args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("# doc_id=wang\tside=reference[0]\tfamily=tense"));
    assert!(text.contains("# doc_id=wang\tside=candidate/reference[0]\tfamily=pronoun"));

    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("counts.tsv");
    let out = run_owned(&worked_args(&["--dump-counts", path(&dump)]));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&dump).unwrap(), text);
}

#[test]
fn compare_reports_t_and_band() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_csv(dir.path(), "a.csv", &[("d1", 3.0), ("d2", 1.0), ("d3", 5.0), ("d4", 2.0)]);
    let b = write_csv(dir.path(), "b.csv", &[("d1", 1.0), ("d2", 1.0), ("d3", 3.0), ("d4", 2.0)]);
    let out = blond(&["compare", path(&a), path(&b)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["t"].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-12);
    assert!((v["p"].as_f64().unwrap() - 0.18169011381620923).abs() < 1e-10);
    assert_eq!(v["band"], "> .1");

    let pretty = stdout(&blond(&["compare", path(&a), path(&b), "--output", "pretty"]));
    assert!(pretty.starts_with("t = 1.7321  p = 0.1817"), "{pretty}");
}

#[test]
fn compare_lists_mismatched_doc_ids() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_csv(dir.path(), "a.csv", &[("d1", 3.0), ("d2", 1.0), ("only_a", 5.0)]);
    let b = write_csv(dir.path(), "b.csv", &[("d1", 1.0), ("d2", 1.0), ("only_b", 3.0)]);
    let out = blond(&["compare", path(&a), path(&b)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let err = stderr(&out);
    assert!(err.contains("only_a") && err.contains("only_b"), "{err}");
}

#[test]
fn correlate_pair_and_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let ids = ["d1", "d2", "d3", "d4", "d5"];
    let rows = |vals: [f64; 5]| ids.iter().copied().zip(vals).collect::<Vec<_>>();
    let m = write_csv(dir.path(), "metric.csv", &rows([1.0, 2.0, 3.0, 4.0, 5.0]));
    let h = write_csv(dir.path(), "human.csv", &rows([2.0, 1.0, 4.0, 3.0, 6.0]));
    let o = write_csv(dir.path(), "other.csv", &rows([5.0, 4.0, 3.0, 2.0, 1.0]));

    let out = blond(&["correlate", path(&m), path(&h)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["r"].as_f64().unwrap() - 0.8219949365267865).abs() < 1e-12);
    assert!((v["ci_low"].as_f64().unwrap() - -0.21936759886631313).abs() < 1e-12);
    assert!((v["ci_high"].as_f64().unwrap() - 0.9878530684492535).abs() < 1e-12);

    let out = blond(&["correlate", path(&m), path(&h), path(&o), "--output", "tsv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with("1.0000\t0.8220\t-1.0000"), "{text}");
}

#[test]
fn correlate_needs_four_documents() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_csv(dir.path(), "m.csv", &[("a", 1.0), ("b", 2.0), ("c", 3.0)]);
    let h = write_csv(dir.path(), "h.csv", &[("a", 1.0), ("b", 3.0), ("c", 2.0)]);
    let out = blond(&["correlate", path(&m), path(&h)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two_and_help_exits_zero() {
    assert_eq!(blond(&["score"]).status.code(), Some(2));
    assert_eq!(blond(&["frobnicate"]).status.code(), Some(2));
    let help = blond(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("score"));
}

#[test]
fn in_process_entry_point_buffers_output() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let args = ["blond", "score", "--candidate", "/nonexistent", "--reference", "/nonexistent"];
    assert_eq!(blond::cli::run(args, &mut out, &mut err), 2);
    assert!(out.is_empty());
    assert!(String::from_utf8(err).unwrap().starts_with("error:"));
}
