use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use btlab_cli::cache::{ball_key, BallCache};
use btlab_cli::config::ExperimentConfig;
use btlab_cli::experiment::run_experiment;
use btlab_core::FieldDescriptor;
use serde_json::{json, Value};

const Q2: &str = r#"{"p":2,"f":1,"e":1,"delta":1,"r":0}"#;
const Q2_SQRT2: &str = r#"{"p":2,"f":1,"e":2,"delta":1,"r":0}"#;
const F2T: &str = r#"{"p":2,"f":1,"e":"inf","delta":1,"r":0}"#;

fn btlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_btlab")).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_config(dir: &Path, cfg: Value) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, cfg.to_string()).unwrap();
    path
}

fn reference_fields() -> Value {
    json!([
        { "name": "Q_2", "descriptor": serde_json::from_str::<Value>(Q2).unwrap() },
        { "name": "Q_2[sqrt2]", "descriptor": serde_json::from_str::<Value>(Q2_SQRT2).unwrap() },
        { "name": "F_2((t))", "descriptor": serde_json::from_str::<Value>(F2T).unwrap() },
    ])
}

#[test]
fn field_commands() {
    let out = btlab(&["field", "validate", Q2]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["valid"], json!(true));
    let bad = btlab(&["field", "validate", r#"{"p":4,"f":1,"e":1,"delta":1,"r":0}"#]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("p not prime"));
    let out = btlab(&["field", "close", Q2_SQRT2, F2T, "--max-r", "4"]);
    assert_eq!(stdout_json(&out)["closeness"], json!(2));
    let missing = btlab(&["field", "validate", "/nonexistent/descriptor.json"]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn ring_commands() {
    let out = btlab(&["ring", "build", Q2, "--r", "3"]);
    let v = stdout_json(&out);
    assert_eq!((v["size"].clone(), v["characteristic"].clone(), v["units"].clone()), (json!(8), json!(8), json!(4)));
    let table = btlab(&["ring", "table", F2T, "--r", "2"]);
    let text = String::from_utf8(table.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.is_empty()).count(), 10);
    assert!(text.starts_with("add,"));
    let too_big = btlab(&["ring", "table", Q2, "--r", "7"]);
    assert_eq!(too_big.status.code(), Some(3));
    let iso = stdout_json(&btlab(&["ring", "iso", Q2, F2T, "--r", "2"]));
    assert_eq!(iso["isomorphic"], json!(false));
    assert_eq!(iso["invariant"], json!("additive order of 1"));
    let iso = stdout_json(&btlab(&["ring", "iso", Q2_SQRT2, F2T, "--r", "2"]));
    assert_eq!(iso["map"].as_array().unwrap().len(), 4);
}

#[test]
fn ball_pipeline_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("x3.json");
    let g = graph.to_str().unwrap();
    let out = btlab(&["ball", "export", F2T, "--d", "3", "--r", "3", "--out", g]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&graph).unwrap()).unwrap();
    assert_eq!(doc["meta"]["R"], json!(3));
    assert_eq!(doc["vertices"].as_array().unwrap().len(), 673);

    let ok = btlab(&["geometry", "verify", g, "--diagram", "atilde:3", "--scope", "interior"]);
    assert_eq!(ok.status.code(), Some(0));
    let full = btlab(&["geometry", "verify", g, "--diagram", "atilde:3", "--scope", "full"]);
    assert_eq!(full.status.code(), Some(1));
    assert!(!stdout_json(&full)["violations"].as_array().unwrap().is_empty());

    let germs = btlab(&["germs", "label", g, "--diagram", "atilde:3", "--certificate", "3"]);
    assert_eq!(germs.status.code(), Some(0));
    let v = stdout_json(&germs);
    assert_eq!(v["outcome"], json!("labelling"));
    assert_eq!(v["certificate"]["passed"], json!(true));

    let budget = btlab(&["--budget-vertices", "10", "ball", "build", F2T, "--d", "3", "--r", "2"]);
    assert_eq!(budget.status.code(), Some(2));
    let bad_diagram = btlab(&["geometry", "verify", g, "--diagram", "atilde:2"]);
    assert_eq!(bad_diagram.status.code(), Some(3));
    let unknown = btlab(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(3));

    let dot = btlab(&["--format", "dot", "ball", "export", F2T, "--d", "2", "--r", "1"]);
    assert!(String::from_utf8(dot.stdout).unwrap().starts_with("graph ball {"));
}

#[test]
fn odd_cycle_reports_an_obstruction() {
    let dir = tempfile::tempdir().unwrap();
    let c9 = btlab_core::graph::fixtures::cycle(9);
    let path = dir.path().join("c9.json");
    fs::write(&path, c9.to_json().to_string()).unwrap();
    let out = btlab(&["germs", "label", path.to_str().unwrap(), "--diagram", "rank2:4"]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["outcome"], json!("obstruction"));
    assert_eq!(v["cycle"].as_array().unwrap().len(), 9);
}

#[test]
fn iso_commands() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (desc, path) in [(Q2_SQRT2, &a), (F2T, &b)] {
        btlab(&["ball", "export", desc, "--d", "3", "--r", "2", "--out", path.to_str().unwrap()]);
    }
    let ca = stdout_json(&btlab(&["iso", "canon", a.to_str().unwrap()]));
    let cb = stdout_json(&btlab(&["iso", "canon", b.to_str().unwrap()]));
    assert_eq!(ca["sha256"], cb["sha256"]);
    let cmp = stdout_json(&btlab(&["iso", "compare", a.to_str().unwrap(), b.to_str().unwrap()]));
    assert_eq!(cmp["isomorphic"], json!(true));
    let cmp = stdout_json(&btlab(&["ball", "compare", Q2, F2T, "--d", "3", "--r", "2"]));
    assert_eq!(cmp["isomorphic"], json!(false));
}

#[test]
fn reference_experiment_matrix_and_warm_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(
        dir.path(),
        json!({ "fields": reference_fields(), "d": 3, "r_min": 1, "r_max": 2, "output_dir": "out" }),
    );
    let cfg = ExperimentConfig::load(&cfg_path).unwrap();
    let (path, report) = run_experiment(&cfg).unwrap();
    assert_eq!(
        report["closeness"]["matrix"],
        json!([["inf", 1, 1], [1, "inf", 2], [1, 2, "inf"]])
    );
    assert_eq!(report["config"]["d"], json!(3));
    assert_eq!(report["version"], json!(env!("CARGO_PKG_VERSION")));
    let cells = report["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 6);
    assert!(cells.iter().all(|c| c.get("error").is_none()));
    let cold = fs::read(&path).unwrap();
    let cached = fs::read_dir(dir.path().join("out/cache")).unwrap().count();
    assert_eq!(cached, 6);
    let (_, _) = run_experiment(&cfg).unwrap();
    assert_eq!(fs::read(&path).unwrap(), cold);
}

#[test]
fn tree_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(
        dir.path(),
        json!({ "fields": [reference_fields()[2].clone()], "d": 2, "r_min": 3, "r_max": 3, "output_dir": "out", "cache": false }),
    );
    let (_, report) = run_experiment(&ExperimentConfig::load(&cfg_path).unwrap()).unwrap();
    let cell = &report["cells"][0];
    assert_eq!(cell["stats"]["vertices"], json!(22));
    assert_eq!(cell["stats"]["shape"]["girth"], Value::Null);
    assert!(!dir.path().join("out/cache").exists());
}

#[test]
fn budget_errors_stay_inside_their_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(
        dir.path(),
        json!({ "fields": reference_fields(), "d": 3, "r_min": 1, "r_max": 3, "output_dir": "out",
                "budget": { "max_vertices": 500 } }),
    );
    let (_, report) = run_experiment(&ExperimentConfig::load(&cfg_path).unwrap()).unwrap();
    let cells = report["cells"].as_array().unwrap();
    let failed: Vec<&Value> = cells.iter().filter(|c| c.get("error").is_some()).collect();
    assert_eq!(failed.len(), 3);
    assert!(failed.iter().all(|c| c["r"] == json!(3) && c["error"]["budget"] == json!(true)));
    assert!(cells.iter().filter(|c| c["r"] != json!(3)).all(|c| c["stats"]["vertices"].is_number()));
}

#[test]
fn invalid_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_config(dir.path(), json!({ "fields": [], "d": 3, "r_min": 1, "r_max": 2, "output_dir": "out" }));
    let err = run_experiment(&ExperimentConfig::load(&empty).unwrap()).unwrap_err();
    assert!(err.to_string().contains("field list is empty"));
    assert_eq!(btlab_cli::exit_code(&err), 3);
    let out = btlab(&["experiment", "run", "--config", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    for bad in [
        json!({ "fields": reference_fields(), "d": 3, "r_min": 3, "r_max": 2, "output_dir": "out" }),
        json!({ "fields": reference_fields(), "d": 1, "r_min": 1, "r_max": 2, "output_dir": "out" }),
        json!({ "fields": reference_fields(), "d": 3, "r_min": 1, "r_max": 2, "output_dir": "out", "budget": { "max_ring": 0 } }),
    ] {
        let path = write_config(dir.path(), bad);
        assert!(run_experiment(&ExperimentConfig::load(&path).unwrap()).is_err());
    }
    let typo = write_config(dir.path(), json!({ "fields": [], "d": 3, "r_min": 1, "r_max": 2, "output_dr": "out" }));
    assert!(ExperimentConfig::load(&typo).is_err());
}

#[test]
fn cache_keys_and_atomic_store() {
    let q2 = FieldDescriptor::qp(2);
    assert_eq!(ball_key(&q2, 2, 3), ball_key(&q2, 2, 3));
    assert_ne!(ball_key(&q2, 2, 3), ball_key(&q2, 3, 3));
    assert_ne!(ball_key(&q2, 2, 3), ball_key(&q2, 2, 4));
    assert_ne!(ball_key(&q2, 2, 3), ball_key(&FieldDescriptor::laurent(2, 1), 2, 3));

    let dir = tempfile::tempdir().unwrap();
    let cache = BallCache::new(dir.path().join("c"));
    let g = btlab_core::graph::fixtures::fano_incidence();
    cache.store("k", &g).unwrap();
    assert_eq!(cache.load("k").unwrap().edges(), g.edges());
    assert!(cache.load("missing").is_none());
    let names: Vec<String> = fs::read_dir(cache.dir()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(names, vec!["k.json".to_string()]);
}
