#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn shipped_scenarios() -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(workspace_root().join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "scn"))
        .collect();
    out.sort();
    out
}

pub fn schema() -> jsonschema::Validator {
    let text = std::fs::read_to_string(workspace_root().join("docs/report.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

/// Schema violations as readable strings; empty when the report is valid.
pub fn violations(validator: &jsonschema::Validator, report: &Value) -> Vec<String> {
    validator.iter_errors(report).map(|e| format!("{} at {}", e, e.instance_path)).collect()
}

/// Drops every `timing` member, recursively.
pub fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("timing");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

const PIECES: &[&str] = &[
    "I1", "I2", "I3", "I0", "th1", "th2", "th9", "eps", "pi", "sin", "cos", "exp", "tan", "(", ")", "(", ")", "+", "-",
    "*", "/", "^", "1", "0.5", "2e3", "1e400", ".", "..", "e", " ", "\n", "\t", "$", "foo", "_", "é", "0", "3.25",
    "1e-3", ",", "[", "=",
];

const SEEDS: &[&str] = &[
    "I1^2/2 + 0.1*sin(2*pi*th1)",
    "exp(-I2)*cos(2*pi*(th1 - th2))",
    "-(I1 + eps)^-2",
    "2^3^2 - --4",
];

/// Seeded strings mixing grammar tokens, arbitrary characters and mutated valid expressions.
pub fn fuzz_corpus(seed: u64, n: usize) -> Vec<String> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| match i % 3 {
            0 => (0..r.random_range(0..40)).map(|_| PIECES[r.random_range(0..PIECES.len())]).collect(),
            1 => (0..r.random_range(0..30))
                .map(|_| char::from_u32(r.random_range(0..0x250)).unwrap_or('?'))
                .collect(),
            _ => {
                let mut s: Vec<char> = SEEDS[r.random_range(0..SEEDS.len())].chars().collect();
                for _ in 0..r.random_range(1..4) {
                    let at = r.random_range(0..=s.len());
                    if r.random_bool(0.5) && at < s.len() {
                        s.remove(at);
                    } else {
                        let p = PIECES[r.random_range(0..PIECES.len())];
                        for (k, c) in p.chars().enumerate() {
                            s.insert(at + k, c);
                        }
                    }
                }
                s.into_iter().collect()
            }
        })
        .collect()
}
