mod common;

use std::process::Command;

use serde_json::Value;
use toravg_cli::{parse_scenario, run_scenario, RunOptions, TASK_KINDS};

fn run_text(text: &str, opts: &RunOptions) -> Value {
    let sc = parse_scenario(text).unwrap();
    serde_json::from_str(&run_scenario(&sc, opts).unwrap().to_json()).unwrap()
}

fn check<'a>(report: &'a Value, task: usize, id: &str) -> &'a Value {
    report["tasks"][task]["checks"].as_array().unwrap().iter().find(|c| c["id"] == id).unwrap()
}

const HARMONIC: &str = "
[space]
dim = 1
actions = 0.5..1.5
[field one]
expr = 1
[vector X]
angle1 = one
action1 = one
[task decompose]
input = X
tol.a_norm = 1e-10
";

const CLOSED_FORM: &str = "
seed = 3
[space]
dim = 1
actions = 0.5..3.5
[field h]
expr = I1 + 0.1*sin(2*pi*th1)
[vector X]
hamiltonian = h
[field j]
expr = I1
[task normal-form]
generator = X
base = j
eps = 0.5
";

const PERIODS: &str = "
[space]
dim = 2
actions = 0.5..1.5
[task verify-periods]
potential = canonical
base_points = 3
";

#[test]
fn harmonic_field_has_no_hamiltonian_part() {
    let r = run_text(HARMONIC, &RunOptions::default());
    assert!(check(&r, 0, "a_norm")["value"].as_f64().unwrap() < 1e-10);
    assert_eq!(check(&r, 0, "lift")["pass"], true);
    assert_eq!(r["tasks"][0]["data"]["lift_base"][0][0], 1.0);
    assert_eq!(r["exit_code"], 0);
}

#[test]
fn closed_form_normal_form_residual() {
    let r = run_text(CLOSED_FORM, &RunOptions::default());
    assert!(check(&r, 0, "residual")["value"].as_f64().unwrap() < 1e-5);
    assert_eq!(r["pass"], true);
}

#[test]
fn canonical_potential_defects() {
    let r = run_text(PERIODS, &RunOptions::default());
    assert!(check(&r, 0, "one_periodicity")["value"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["tasks"][0]["data"]["winding"], serde_json::json!([[1, 0], [0, 1]]));
}

#[test]
fn reports_are_deterministic_up_to_timing() {
    let opts = RunOptions { seed: Some(11), ..RunOptions::default() };
    let text = format!("{CLOSED_FORM}\n[task flow-decompose]\ngenerator = X\npoints = 7\n{}", &PERIODS[PERIODS.find("[task").unwrap()..]);
    let text = text.replace("dim = 2", "dim = 1").replace("0.5..1.5", "0.5..3.5");
    let mut a = run_text(&text, &opts);
    let mut b = run_text(&text, &opts);
    assert_eq!(a["seed"], 11);
    common::strip_timing(&mut a);
    common::strip_timing(&mut b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn failures_are_recorded_and_schema_valid() {
    let schema = common::schema();
    // `I1 d/dI1` is not symplectic, so neither task can run.
    let text = "
[space]
dim = 1
actions = 0.5..1.5
[field i]
expr = I1
[vector Y]
action1 = i
[task flow-decompose]
generator = Y
[task decompose]
input = Y
[task average]
input = i
tol.quadrature = 1e-300
[task average]
input = i
";
    let r = run_text(text, &RunOptions { tol_scale: 2.0, ..RunOptions::default() });
    assert!(common::violations(&schema, &r).is_empty(), "{:?}", common::violations(&schema, &r));
    let tasks = r["tasks"].as_array().unwrap();
    assert!(tasks[0]["error"].is_string() && tasks[0]["data"].is_null());
    assert!(tasks[1]["error"].as_str().unwrap().contains("not symplectic"));
    assert_eq!(tasks[2]["pass"], false);
    assert_eq!(check(&r, 2, "quadrature")["tol"], 2e-300);
    assert_eq!(tasks[3]["pass"], true);
    assert_eq!((r["pass"].clone(), r["exit_code"].clone()), (Value::Bool(false), Value::from(1)));
}

#[test]
fn truncation_loss_is_reported() {
    let text = "
[space]
dim = 1
actions = 0..1
truncation = 2
grid = 5
[field f]
expr = exp(cos(2*pi*th1))
[task average]
input = f
";
    let r = run_text(text, &RunOptions::default());
    let f = &r["fields"][0];
    assert!(f["truncation_tail"].as_f64().unwrap() > 1e-10);
    assert!(f["warning"].as_str().unwrap().contains("truncation"));
    assert_eq!(r["pass"], true);
}

#[test]
fn scenario_errors_point_at_lines() {
    let cases = [
        ("[space]\ndim = 1\nactions = 0..1\n[vector V]\nangle1 = h\n[field h]\nexpr = 1\n", 5),
        ("[space]\ndim = 1\nactions = 0..1\n[field h]\nexpr = 1 +\n", 5),
        ("[space]\ndim = 1\nactions = 0..1\n[task normal-form]\ngenerator = X\n", 5),
        ("[space]\ndim = 1\nactions = 0..1\n[task property-suite]\nsuite = 8\n", 5),
        ("[space]\ndim = 1\nactions = 0..1\nactions = 0..2\n", 4),
        ("[space]\ndim = 2\nactions = 0..1, 0..1, 0..1\n[task verify-periods]\n", 3),
        ("[space]\ndim = 1\nactions = 0..1\n[task average]\ninput\n", 5),
        ("[space]\ndim = 1\nactions = 0..1\n[mystery]\n", 4),
    ];
    for (text, line) in cases {
        assert_eq!(parse_scenario(text).unwrap_err().line, line, "{text}");
    }
}

#[test]
fn scenario_parser_is_total_on_mutated_files() {
    let base = std::fs::read_to_string(common::workspace_root().join("scenarios/07-flow-decomposition.scn")).unwrap();
    for (i, junk) in common::fuzz_corpus(5, 200).into_iter().enumerate() {
        let at = (i * 37) % base.len();
        let at = (0..=at).rev().find(|&k| base.is_char_boundary(k)).unwrap();
        let text = format!("{}{junk}{}", &base[..at], &base[at..]);
        let _ = parse_scenario(&text);
    }
}

fn toravg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_toravg"))
}

#[test]
fn binary_exit_codes_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.scn");
    std::fs::write(&good, HARMONIC.replace("tol.a_norm = 1e-10", "tol.a_norm = 1e-10\noutput = a.json")).unwrap();
    let report = dir.path().join("report.json");
    let st = toravg().arg("run").arg(&good).arg("--out").arg(&report).args(["--seed", "5"]).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!((r["seed"].clone(), r["scenario"]["source"].clone()), (Value::from(5), Value::from("good.scn")));
    assert_eq!(r["tasks"][0]["data"]["output"], "a.json");
    let written: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert!(written["a"]["modes"].as_array().unwrap().is_empty());

    let failing = dir.path().join("failing.scn");
    let with_h = HARMONIC.replace("[vector X]\n", "[field h]\nexpr = 0.1*cos(2*pi*th1)\n[vector X]\nhamiltonian = h\n");
    std::fs::write(&failing, with_h).unwrap();
    let out = toravg().arg("run").arg(&failing).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["exit_code"], 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("a_norm"));

    let broken = dir.path().join("broken.scn");
    std::fs::write(&broken, "[space]\ndim = 1\nactions = 0..1\n[field f]\nexpr = 1 + \n").unwrap();
    let out = toravg().arg("run").arg(&broken).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5, column 11"));

    assert_eq!(toravg().arg("run").arg(dir.path().join("missing.scn")).output().unwrap().status.code(), Some(2));
    assert_eq!(toravg().args(["run", "x", "--tol-scale", "-1"]).output().unwrap().status.code(), Some(2));

    let out = toravg().arg("--list-tasks").output().unwrap();
    assert!(out.status.success());
    let listing = String::from_utf8(out.stdout).unwrap();
    assert!(TASK_KINDS.iter().all(|(_, name, _)| listing.contains(name)));
}
