use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn samplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_samplan"))
        .args(args)
        .env_remove("SAMPLAN_DEFAULT_FORMAT")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("not json ({e}): {}", stdout(out)))
}

fn schema_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"))
}

fn assert_schema(name: &str, doc: &Value) {
    for file in [name, "output-record"] {
        let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path(file)).unwrap()).unwrap();
        let validator = jsonschema::validator_for(&schema).expect("schema compiles");
        let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{file} schema: {errors:?}");
    }
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("samplan-{}-{name}", std::process::id()))
}

const PLAN: [&str; 8] = ["--r", "5", "--g", "13", "--c", "6", "--i", "2"];

fn with_plan(cmd: &str, rest: &[&str]) -> Vec<String> {
    std::iter::once(cmd).chain(PLAN).chain(rest.iter().copied()).map(String::from).collect()
}

fn run(args: Vec<String>) -> Output {
    samplan(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn design_default_is_json() {
    let out = samplan(&["design", "--kind", "mchgsp", "--r", "5", "--aql", "0.05", "--lql", "0.14", "--alpha", "0.05", "--beta", "0.10"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = json(&out);
    assert_schema("design", &doc);
    assert_eq!(doc["schema_version"], "1");
    assert_eq!(doc["command"], "design");
    let r = &doc["result"];
    assert_eq!(r["status"], "feasible");
    assert_eq!(r["kind"], "mchgsp");
    assert_eq!((r["params"]["g"].as_u64(), r["params"]["c"].as_u64(), r["params"]["i"].as_u64()), (Some(4), Some(3), Some(10)));
    assert_eq!(r["n"], 20);
    assert!(r["oc_at_aql"].as_f64().unwrap() >= 0.95);
    assert!(r["oc_at_lql"].as_f64().unwrap() <= 0.10);
}

#[test]
fn design_short_chains_give_worked_example() {
    let out = samplan(&["design", "--r", "5", "--aql", "0.05", "--lql", "0.14", "--i-max", "2"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["result"];
    assert_eq!(r["params"], serde_json::json!({ "r": 5, "g": 13, "c": 6, "i": 2 }));
    assert_eq!(r["n"], 65);
}

#[test]
fn design_sasip_ignores_r() {
    let out = samplan(&["design", "--kind", "sasip", "--aql", "0.01", "--lql", "0.05"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["result"]["n"], 132);
    assert_eq!(doc["result"]["params"]["c"], 3);
    assert!(doc["warnings"].as_array().unwrap().is_empty());

    let out = samplan(&["design", "--kind", "sasip", "--r", "5", "--aql", "0.01", "--lql", "0.05"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn design_usage_errors_name_the_flag() {
    let out = samplan(&["design", "--kind", "mchgsp", "--r", "5", "--aql", "0.2", "--lql", "0.1", "--alpha", "0.05", "--beta", "0.10"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--lql: lql must exceed aql"), "{}", stderr(&out));

    let out = samplan(&["design", "--kind", "gasip", "--aql", "0.05", "--lql", "0.14"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--r"));

    let out = samplan(&["design", "--r", "5", "--aql", "0", "--lql", "0.14"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--aql"));

    let out = samplan(&["design", "--r", "5", "--aql", "5%", "--lql", "0.14"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("percent"));
}

#[test]
fn design_infeasible_exits_2() {
    let out = samplan(&["design", "--r", "5", "--aql", "0.05", "--lql", "0.051", "--g-max", "50"]);
    assert_eq!(code(&out), 2);
    let doc = json(&out);
    assert_schema("design", &doc);
    assert_eq!(doc["result"]["status"], "infeasible");
    assert_eq!(doc["result"]["bounds"]["g_max"], 50);

    let out = samplan(&["design", "--kind", "gasip", "--r", "5", "--aql", "0.05", "--lql", "0.14", "--c-max", "7", "--format", "csv"]);
    assert_eq!(code(&out), 2);
    assert_eq!(stdout(&out), "status,kind,g_max,c_max,i_max\ninfeasible,gasip,1000,7,10\n");
}

#[test]
fn oc_single_point() {
    let out = run(with_plan("oc", &["--p", "0.05"]));
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_schema("oc", &doc);
    let row = &doc["result"]["rows"][0];
    assert!((row["oc_mchgsp"].as_f64().unwrap() - 0.954_920_5).abs() < 1e-6);
    assert!((row["oc_gasip"].as_f64().unwrap() - 0.956_713_1).abs() < 1e-6);
    assert_eq!(doc["result"]["n"], 65);

    let out = run(with_plan("oc", &["--p", "0.0"]));
    let doc = json(&out);
    assert_eq!(doc["result"]["rows"][0]["oc_mchgsp"].as_f64(), Some(1.0));
}

#[test]
fn oc_dist_matches_fraction() {
    let via_p = json(&run(with_plan("oc", &["--p", "0.05"])));
    let out = run(with_plan("oc", &["--dist", "exponential:scale=10", "--time", "0.5129329"]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let via_t = json(&out);
    assert_schema("oc", &via_t);
    let a = via_p["result"]["rows"][0]["oc_mchgsp"].as_f64().unwrap();
    let row = &via_t["result"]["rows"][0];
    assert!((row["oc_mchgsp"].as_f64().unwrap() - a).abs() < 1e-6);
    assert_eq!(row["time"].as_f64(), Some(0.5129329));
    assert!((row["p"].as_f64().unwrap() - 0.05).abs() < 1e-7);
}

#[test]
fn oc_grid_csv() {
    let out = run(with_plan("oc", &["--grid", "0:0.2:0.05", "--format", "csv"]));
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,oc_mchgsp,oc_gasip");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("0,1,1"));
    assert!(!text.contains('\r'));
    let rates: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(rates.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn oc_usage_errors() {
    for bad in [
        vec!["--grid", "0.5:0.1:0.1"],
        vec!["--grid", "0:1:0"],
        vec!["--p", "1.5"],
        vec!["--dist", "exponential:scale=10"],
        vec![],
        vec!["--p", "0.1", "--grid", "0:1:0.5"],
    ] {
        let out = run(with_plan("oc", &bad));
        assert_eq!(code(&out), 1, "{bad:?}");
    }
    let out = samplan(&["oc", "--r", "5", "--g", "2", "--c", "11", "--p", "0.1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--c"));
}

#[test]
fn format_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_samplan"))
        .args(with_plan("oc", &["--p", "0.05"]))
        .env("SAMPLAN_DEFAULT_FORMAT", "csv")
        .output()
        .unwrap();
    assert!(stdout(&out).starts_with("p,oc_mchgsp,oc_gasip\n"));

    let out = Command::new(env!("CARGO_BIN_EXE_samplan"))
        .args(with_plan("oc", &["--p", "0.05", "--format", "text"]))
        .env("SAMPLAN_DEFAULT_FORMAT", "csv")
        .output()
        .unwrap();
    assert!(stdout(&out).starts_with("plan r = 5"));
}

#[test]
fn simulate_extremes_and_determinism() {
    let out = run(with_plan("simulate", &["--p", "0", "--lots", "100", "--seed", "1"]));
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_schema("simulate", &doc);
    assert_eq!(doc["result"]["sim"]["rate"].as_f64(), Some(1.0));

    let out = run(with_plan("simulate", &["--p", "1", "--lots", "100", "--seed", "1"]));
    assert_eq!(json(&out)["result"]["sim"]["rate"].as_f64(), Some(0.0));

    let args = with_plan("simulate", &["--p", "0.05", "--lots", "20000", "--seed", "42"]);
    let first = run(args.clone());
    let second = run(args);
    assert_eq!(first.stdout, second.stdout);
    let r = &json(&first)["result"];
    assert!(r["z"].as_f64().unwrap().abs() <= 4.0);
    assert_eq!(r["flagged"], false);
}

#[test]
fn simulate_usage_errors() {
    let out = run(with_plan("simulate", &["--p", "0.05", "--lots", "2"]));
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--lots"));
    let out = run(with_plan("simulate", &["--p", "0.05", "--burn-in", "1"]));
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--burn-in"));
}

#[test]
fn reproduce_bad_table() {
    let out = samplan(&["reproduce", "--table", "7"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("table must be 1 or 2"));
}

#[test]
fn reproduce_table2_csv() {
    let out = samplan(&["reproduce", "--table", "2", "--format", "csv"]);
    assert_eq!(code(&out), 3);
    let text = stdout(&out);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header.len(), 9);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 20);
    let row = rows.iter().find(|r| &r[0] == "0.1" && &r[1] == "0.3").unwrap();
    // printed mchgsp / gasip / sasip columns
    assert_eq!((&row[2], &row[4], &row[6]), ("35", "35", "41"));
    assert_eq!(&row[3], "10");
}

#[test]
fn reproduce_table1_json_to_file() {
    let path = temp_path("table1.json");
    let out = samplan(&["reproduce", "--table", "1", "--tolerance", "1e-3", "--output", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_schema("reproduce", &doc);
    let rows = doc["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 20);
    let flagged = rows.iter().filter(|r| r["oc_within_tolerance"] == false).count();
    assert_eq!(flagged, 4);
    assert_eq!(doc["warnings"].as_array().unwrap().len(), 1 + flagged);
}

#[test]
fn reproduce_json_schemas_both_tables() {
    let out = samplan(&["reproduce", "--table", "2"]);
    assert_schema("reproduce", &json(&out));
}

#[test]
fn reproduce_unwritable_output() {
    let out = samplan(&["reproduce", "--table", "2", "--output", "/nonexistent-dir/x/report.csv", "--format", "csv"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--output"));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&samplan(&["--help"])), 0);
    assert_eq!(code(&samplan(&["--version"])), 0);
    assert_eq!(code(&samplan(&["design", "--help"])), 0);
    assert_eq!(code(&samplan(&["bogus"])), 1);
    assert_eq!(code(&samplan(&[])), 1);
}

#[test]
fn every_command_renders_every_format() {
    let cases = [
        vec!["design", "--r", "5", "--aql", "0.05", "--lql", "0.14"],
        vec!["oc", "--r", "5", "--g", "13", "--c", "6", "--i", "2", "--p", "0.1"],
        vec!["simulate", "--r", "5", "--g", "13", "--c", "6", "--i", "2", "--p", "0.1", "--lots", "500"],
        vec!["reproduce", "--table", "1"],
    ];
    for args in &cases {
        for format in ["json", "csv", "text"] {
            let mut full = args.clone();
            full.extend(["--format", format]);
            let out = samplan(&full);
            assert!(matches!(code(&out), 0 | 3), "{full:?}: {}", stderr(&out));
            assert!(!out.stdout.is_empty(), "{full:?}");
            if format == "json" {
                let doc = json(&out);
                assert_schema(args[0], &doc);
                // round trip without loss
                let again: Value = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
                assert_eq!(again, doc);
            }
        }
    }
}

#[test]
fn schemas_reject_malformed_records() {
    let out = samplan(&["design", "--r", "5", "--aql", "0.05", "--lql", "0.14"]);
    let doc = json(&out);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path("design")).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    assert!(validator.is_valid(&doc));

    let mut missing = doc.clone();
    missing.as_object_mut().unwrap().remove("schema_version");
    assert!(!validator.is_valid(&missing));

    let mut bad_prob = doc.clone();
    bad_prob["result"]["oc_at_aql"] = serde_json::json!(1.5);
    assert!(!validator.is_valid(&bad_prob));

    let mut extra = doc;
    extra["result"]["future_field"] = serde_json::json!(true);
    assert!(validator.is_valid(&extra));
}
