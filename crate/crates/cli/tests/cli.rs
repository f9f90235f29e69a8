use std::process::{Command, Output};

use serde_json::Value;
use suspension_lab::{CountingMeasure, GrowthSpec};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_suspension-lab"));
    c.env_remove("SUSPENSION_LAB_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("every line is JSON"))
        .collect()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn sample_is_byte_identical() {
    let a = run(&["sample", "--window", "L=1", "--seed", "7"]);
    let b = run(&["sample", "--window", "L=1", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let other = run(&["sample", "--window", "L=3", "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn thread_count_does_not_change_reports() {
    let args = ["thin", "--window", "L=1", "--c", "0.5", "--check", "--trials", "2000", "--seed", "4"];
    let one = bin().args(args).env("SUSPENSION_LAB_THREADS", "1").output().unwrap();
    let many = bin().args(args).env("SUSPENSION_LAB_THREADS", "0").output().unwrap();
    assert_eq!(one.stdout, many.stdout);
    let bad = bin().args(args).env("SUSPENSION_LAB_THREADS", "lots").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("SUSPENSION_LAB_THREADS"));
}

#[test]
fn header_embeds_resolved_config() {
    let out = run(&["sample", "--region", "C(0)[1..1] | C(1)[1..2]", "--seed", "11", "--marked"]);
    let ls = lines(&out);
    let header = &ls[0];
    assert_eq!(header["type"], "header");
    assert_eq!(header["config"]["seed"], 11);
    assert_eq!(header["config"]["growth"]["m"], serde_json::json!([3]));
    assert_eq!(header["mass"]["exact"], "1/2^0");
    assert_eq!(header["atoms"].as_u64().unwrap() as usize, ls.len() - 1);
    for atom in &ls[1..] {
        assert!(atom["prefix"].is_string() && atom["level"].is_string() && atom["mark"].is_f64());
    }
}

#[test]
fn config_file_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"growth": {"m": [3, 5]}, "seed": 5, "trials": 500}"#).unwrap();
    let out = dir.path().join("report.jsonl");
    let o = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "riesz", "coeff", "--at", "14"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let ls: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(ls[0]["config"]["seed"], 5);
    assert_eq!(ls[0]["config"]["growth"]["m"], serde_json::json!([3, 5]));
    // n = 1, 3, 15, 75, ...: 14 = 15 - 1
    assert_eq!(ls[1]["limit"], "1/2^2");

    std::fs::write(&cfg, r#"{"sed": 1}"#).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "riesz", "coeff", "--at", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--config"));
}

#[test]
fn usage_errors_exit_two_and_name_the_flag() {
    let o = run(&["sample", "--window", "L=1", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--bogus") && stderr(&o).contains("Usage"));

    let o = run(&["sample", "--window", "L=x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--window") && stderr(&o).contains("Usage"));

    let o = run(&["mecke", "--g", "N(C(0)[1..1]", "--f", "C(0)[1..1]"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--g"));

    let o = run(&["thin", "--window", "L=1", "--c", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--c"));

    let o = run(&["autocorr", "--set", "C(0)[1..1]", "--lags", "1,x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--lags"));

    let o = run(&["suite", "--name", "nightly"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--name"));
}

#[test]
fn limits_exit_three() {
    let o = run(&["riesz", "coeff", "--at", "5", "--levels", "19"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = run(&["oracle", "expect", "--lambda", "1,1,1,1,1,1,1", "--f", "N(A(0))"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    // a level beyond every column of a finite growth sequence
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"growth": {"m": [3], "repeat_last": false}}"#).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "riesz", "coeff", "--at", "100", "--levels", "1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn riesz_and_autocorr_reports() {
    let o = run(&["riesz", "coeff", "--at", "81", "--levels", "6"]);
    let ls = lines(&o);
    assert_eq!(ls[1]["exact"], "1/2^1");
    assert_eq!(ls[1]["limit"], "1/2^1");

    let o = run(&["riesz", "power", "--p", "2"]);
    let ls = lines(&o);
    assert_eq!(ls.len(), 1 + 81);
    assert!(ls[1..].iter().all(|l| l["exact"].is_string()));

    let o = run(&["riesz", "singular", "--p", "1", "--q", "2", "--levels", "4,6,8,10"]);
    let ls = lines(&o);
    assert_eq!(ls.len(), 6);
    assert_eq!(ls[4]["exact"], "5/2^1");
    assert!(ls[4]["overlap"].as_f64().unwrap() < 0.5);
    assert_eq!(ls[5]["exact"]["overlap_decreasing"], true);

    let o = run(&["autocorr", "--set", "C(0)[1..1]", "--lags", "auto-nj", "--max-j", "4"]);
    let exact: Vec<Value> = lines(&o)[1..].iter().map(|l| l["exact"].clone()).collect();
    assert_eq!(exact, ["0/2^0", "1/2^2", "1/2^2", "1/2^2", "1/2^2"]);
}

#[test]
fn golden_autocorrelation_matches_its_derivation_command() {
    let golden: Value =
        serde_json::from_str(include_str!("../../core/tests/golden/autocorr_c0.json")).unwrap();
    let o = run(&["autocorr", "--set", "C(0)[1..1]", "--lags", "auto-nj", "--max-j", "4"]);
    let ls = lines(&o);
    for (i, line) in ls[1..].iter().enumerate() {
        assert_eq!(line["lag"], golden["lags"][i]);
        assert_eq!(line["exact"], golden["exact"][i]);
        assert_eq!(line["normalized"], golden["normalized"][i]);
    }
}

#[test]
fn density_dump_is_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    let o = run(&["riesz", "singular", "--p", "1", "--q", "2", "--levels", "2", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().next(), Some("t,f_p,f_q"));
    assert_eq!(text.lines().nth(1), Some("0,4,2.25"));
}

#[test]
fn monte_carlo_reports_carry_standard_errors() {
    let o = run(&["--trials", "4000", "--seed", "2", "mecke", "--g", "N(C(0)[1..1])", "--f", "C(1)[1..2]"]);
    assert_eq!(o.status.code(), Some(0));
    let r = &lines(&o)[1];
    assert!(r["se_lhs"].is_f64() && r["se_rhs"].is_f64() && r["z"].as_f64().unwrap().abs() <= 3.0);

    let o = run(&["--trials", "100", "project", "--f", "N(C(1)[1..2])", "--at", "C(1)[1..2]", "--at", "C(0)[1..1]"]);
    let r = &lines(&o)[1];
    assert_eq!((r["estimate"].as_f64(), r["standard_error"].as_f64()), (Some(0.0), Some(0.0)));

    let o = run(&["--trials", "3000", "autocorr", "--set", "C(0)[1..1]", "--max-j", "2", "--monte-carlo"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(lines(&o)[1..].iter().all(|l| l["se"].is_f64() && l["exact"].is_string()));
}

#[test]
fn oracle_subcommands() {
    let g = r#"{"lambda": [0.5, 1.25, 2.0, 0.75], "count_cap": 20}"#;
    let o = run(&["oracle", "--ground", g, "mecke", "--g", "I1(A(2)) * I1(A(3)) + N(A(0))", "--f", "A(0) - 2*A(1)"]);
    assert_eq!(o.status.code(), Some(0));
    let r = &lines(&o)[1];
    assert_eq!(r["holds"], true);
    assert!(r["bound"].as_f64().unwrap() < 1e-10);

    let o = run(&["oracle", "orth", "--lambda", "0.5,1.25,2,0.75", "--h", "I1(A(0))", "--g", "I1(A(1)) * I1(A(2))"]);
    assert_eq!(lines(&o)[1]["holds"], true);

    let o = run(&["oracle", "project", "--lambda", "1,2", "--f", "N(A(0))", "--order", "2"]);
    assert_eq!(lines(&o).len(), 1 + 4);

    let o = run(&["oracle", "expect", "--f", "N(A(0))"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--lambda"));
}

#[test]
fn evolve_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.jsonl");
    let o = run(&["sample", "--window", "L=3", "--seed", "21", "--out", first.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let moved = dir.path().join("b.jsonl");
    let o = run(&["evolve", "--input", first.to_str().unwrap(), "--steps", "7", "--out", moved.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let back = run(&["evolve", "--input", moved.to_str().unwrap(), "--steps", "-7"]);
    // moved words reveal more explicit bits, so compare points rather than text
    let spec = GrowthSpec::default();
    let original = CountingMeasure::from_jsonl(&std::fs::read_to_string(&first).unwrap(), &spec).unwrap();
    let returned = CountingMeasure::from_jsonl(&String::from_utf8(back.stdout).unwrap(), &spec).unwrap();
    assert!(!original.is_empty());
    assert_eq!(returned.atoms(), original.atoms());
}

#[test]
fn superpose_and_thin_checks() {
    let o = run(&["--trials", "5000", "superpose", "--first", "L=1", "--second", "C(1)[1..2]", "--check"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(lines(&o)[1]["passed"], true);
    let o = run(&["superpose", "--first", "L=1", "--second", "C(1)[1..2]", "--seed", "3"]);
    assert_eq!(lines(&o)[0]["mass"]["exact"], "3221225471/2^31");
    let o = run(&["--trials", "5000", "thin", "--window", "L=1", "--c", "0.25", "--check"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn suite_single_criterion() {
    let o = run(&["suite", "--name", "acceptance", "--seed", "42", "--only", "1,10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let ls = lines(&o);
    assert_eq!(ls.len(), 4);
    assert_eq!(ls[1]["id"], 1);
    assert_eq!(ls[3]["exact"]["passed"], 2);
    let o = run(&["suite", "--only", "11"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--only"));
}

#[test]
fn full_acceptance_suite() {
    let o = run(&["suite", "--name", "acceptance", "--seed", "42"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let ls = lines(&o);
    assert_eq!(ls.last().unwrap()["exact"]["passed"], 10);
}
