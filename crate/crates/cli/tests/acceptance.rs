//! Acceptance criteria 1-8, one line per criterion. Run with
//! `cargo test -p toravg-cli --test acceptance -- --nocapture`.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use serde_json::Value;
use toravg_cli::{compile_field, parse_expression};
use toravg_core::verify::{run_suite, SuiteConfig, SUITE_NAMES};
use toravg_core::TorusBox;

/// Wall-clock budget per suite.
const SUITE_SECONDS: f64 = 60.0;

struct Line {
    pass: bool,
    text: String,
}

fn suite_criterion(id: u8) -> Line {
    let report = run_suite(id, &SuiteConfig::default());
    let fast = report.seconds < SUITE_SECONDS;
    let mut detail: Vec<String> = report
        .checks
        .iter()
        .map(|c| {
            let rel = if c.lower_bound { ">=" } else { "<" };
            let mark = if c.pass { "" } else { " FAILED" };
            match &c.error {
                Some(e) => format!("{}: error {e}", c.name),
                None => format!("{} {:.2e} {rel} {:.0e}{mark}", c.name, c.value, c.tol),
            }
        })
        .collect();
    detail.push(format!("{:.1}s", report.seconds));
    Line { pass: report.passed() && fast, text: format!("{} suite: {}", report.name, detail.join("; ")) }
}

fn cli_criterion() -> Line {
    let schema = common::schema();
    let mut problems = Vec::new();
    let mut suites = BTreeSet::new();
    let scenarios = common::shipped_scenarios();
    let start = Instant::now();
    for path in &scenarios {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let out = Command::new(env!("CARGO_BIN_EXE_toravg")).arg("run").arg(path).output().unwrap();
        if out.status.code() != Some(0) {
            problems.push(format!("{name} exited with {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
        }
        match serde_json::from_slice::<Value>(&out.stdout) {
            Ok(report) => {
                problems.extend(common::violations(&schema, &report).into_iter().map(|v| format!("{name}: {v}")));
                for t in report["tasks"].as_array().into_iter().flatten() {
                    if t["kind"] == "property-suite" && t["pass"] == true {
                        suites.insert(t["data"]["suite"].as_u64().unwrap_or(0));
                    }
                }
            }
            Err(e) => problems.push(format!("{name}: report is not JSON ({e})")),
        }
    }
    let missing: Vec<u64> = (1..=SUITE_NAMES.len() as u64).filter(|i| !suites.contains(i)).collect();
    if !missing.is_empty() {
        problems.push(format!("suites {missing:?} are not reproduced by any shipped scenario"));
    }

    let space = TorusBox::cube(2, 0.5, 1.5, 2, 5).unwrap();
    let corpus = common::fuzz_corpus(2024, 1000);
    let (mut accepted, mut crashes) = (0, 0);
    for text in &corpus {
        let outcome = catch_unwind(AssertUnwindSafe(|| match parse_expression(text, 2) {
            Ok(e) => {
                let _ = e.eval(&[0.1, 0.7], &[0.9, 1.3], 0.2);
                let _ = compile_field(&e, &space, 0.2);
                true
            }
            Err(err) => {
                let _ = err.to_string();
                false
            }
        }));
        match outcome {
            Ok(true) => accepted += 1,
            Ok(false) => {}
            Err(_) => crashes += 1,
        }
    }
    if crashes > 0 {
        problems.push(format!("{crashes} fuzz strings crashed the parser"));
    }
    let summary = format!(
        "{} scenarios exit 0 with schema-valid reports covering suites {:?} ({:.1}s); fuzz {} strings, {} parsed, {} crashes",
        scenarios.len(),
        suites,
        start.elapsed().as_secs_f64(),
        corpus.len(),
        accepted,
        crashes
    );
    let text = if problems.is_empty() { summary } else { format!("{summary}; {}", problems.join("; ")) };
    Line { pass: problems.is_empty() && !scenarios.is_empty(), text }
}

#[test]
fn acceptance_criteria() {
    let mut all = true;
    for id in 1..=8u8 {
        let line = if id <= 7 { suite_criterion(id) } else { cli_criterion() };
        all &= line.pass;
        println!("criterion {id}: {} | {}", if line.pass { "PASS" } else { "FAIL" }, line.text);
    }
    assert!(all, "at least one acceptance criterion failed");
}
