//! Scenario files: a space block, named fields and vectors, and an ordered list of tasks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::expr::{parse_expression, Expr, ParseError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioError {
    pub line: usize,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.column {
            Some(c) => write!(f, "line {}, column {c}: {}", self.line, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

impl std::error::Error for ScenarioError {}

fn fail<T>(line: usize, message: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError { line, column: None, message: message.into() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSpec {
    pub dim: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub truncation: usize,
    pub grid: usize,
    pub shrink: f64,
    pub eps_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDef {
    pub name: String,
    pub text: String,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorDef {
    pub name: String,
    /// `X_H` contributions.
    pub hamiltonian: Option<String>,
    pub angle: Vec<Option<String>>,
    pub action: Vec<Option<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Average,
    Decompose,
    FlowDecompose,
    NormalForm,
    VerifyPeriods,
    PropertySuite,
}

pub const TASK_KINDS: [(TaskKind, &str, &str); 6] = [
    (TaskKind::Average, "average", "vertical average of a field or vector, with idempotence and quadrature checks"),
    (TaskKind::Decompose, "decompose", "split a symplectic vector into Hamiltonian and lift parts"),
    (TaskKind::FlowDecompose, "flow-decompose", "factor a generator flow into fiber-preserving and Hamiltonian flows"),
    (TaskKind::NormalForm, "normal-form", "normal form J(eps) o phi = I_nf o phi_G of a deformation"),
    (TaskKind::VerifyPeriods, "verify-periods", "action functions, lattice sections and winding numbers"),
    (TaskKind::PropertySuite, "property-suite", "one of the seeded property suites 1-7"),
];

impl TaskKind {
    pub fn name(self) -> &'static str {
        TASK_KINDS.iter().find(|t| t.0 == self).map(|t| t.1).unwrap_or_default()
    }

    fn parse(s: &str) -> Option<Self> {
        TASK_KINDS.iter().find(|t| t.1 == s).map(|t| t.0)
    }

    /// Checks whose tolerance a task block may override.
    pub fn check_ids(self) -> &'static [&'static str] {
        match self {
            TaskKind::Average => &["idempotence", "d_commutes", "quadrature", "omega_compatibility", "invariant"],
            TaskKind::Decompose => {
                &["reconstruction", "a_zero_average", "closed_lift", "lift", "invariant", "hamiltonian_match", "a_norm"]
            }
            TaskKind::FlowDecompose => &["g_zero_average", "recomposition", "g_match"],
            TaskKind::NormalForm => &["residual", "angle_independence", "g_zero_average"],
            TaskKind::VerifyPeriods => &["one_periodicity", "winding_identity", "independence_determinant"],
            TaskKind::PropertySuite => &[],
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            TaskKind::Average => &["input"],
            TaskKind::Decompose => &["input", "expect_hamiltonian"],
            TaskKind::FlowDecompose => &["generator", "eps", "expect_g", "points"],
            TaskKind::NormalForm => &["generator", "base", "eps"],
            TaskKind::VerifyPeriods => &["potential", "shift", "constants", "offsets", "speed", "base_points"],
            TaskKind::PropertySuite => &["suite", "samples"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskDef {
    pub kind: TaskKind,
    pub line: usize,
    pub label: Option<String>,
    /// Raw `key = value` pairs, echoed in the report.
    pub inputs: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    pub output: Option<String>,
}

impl TaskDef {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.inputs.get(key).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub space: SpaceSpec,
    pub fields: Vec<FieldDef>,
    pub vectors: Vec<VectorDef>,
    pub tasks: Vec<TaskDef>,
}

impl Scenario {
    pub fn field(&self, name: &str) -> Option<&FieldDef> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn vector(&self, name: &str) -> Option<&VectorDef> {
        self.vectors.iter().find(|v| v.name == name)
    }
}

enum Section {
    Top,
    Space,
    Field(String),
    Vector(String),
    Task(TaskKind),
}

struct Block {
    section: Section,
    line: usize,
    entries: Vec<(String, String, usize, usize)>,
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn split_blocks(text: &str) -> Result<Vec<Block>, ScenarioError> {
    let mut blocks = vec![Block { section: Section::Top, line: 0, entries: Vec::new() }];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or_default();
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(inner) = trimmed.strip_prefix('[') {
            let Some(inner) = inner.strip_suffix(']') else {
                return fail(line, "section header is missing `]`");
            };
            let mut words = inner.split_whitespace();
            let head = words.next().unwrap_or_default();
            let arg = words.next();
            if words.next().is_some() {
                return fail(line, "section header has too many words");
            }
            let named = |what: &str| -> Result<String, ScenarioError> {
                match arg {
                    Some(n) if is_name(n) => Ok(n.to_string()),
                    Some(n) => fail(line, format!("invalid {what} name `{n}`")),
                    None => fail(line, format!("[{what}] needs a name")),
                }
            };
            let section = match head {
                "space" if arg.is_none() => Section::Space,
                "field" => Section::Field(named("field")?),
                "vector" => Section::Vector(named("vector")?),
                "task" => match arg.and_then(TaskKind::parse) {
                    Some(kind) => Section::Task(kind),
                    None => {
                        let names: Vec<&str> = TASK_KINDS.iter().map(|t| t.1).collect();
                        return fail(line, format!("[task] needs one of: {}", names.join(", ")));
                    }
                },
                _ => return fail(line, format!("unknown section `[{inner}]`")),
            };
            blocks.push(Block { section, line, entries: Vec::new() });
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return fail(line, "expected `key = value` or a `[section]` header");
        };
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
            return fail(line, format!("invalid key `{key}`"));
        }
        let value_start = content.len() - value.len();
        let lead = value.len() - value.trim_start().len();
        let column = content[..value_start].chars().count() + value[..lead].chars().count() + 1;
        let block = blocks.last_mut().expect("top block always present");
        if block.entries.iter().any(|e| e.0 == key) {
            return fail(line, format!("duplicate key `{key}`"));
        }
        block.entries.push((key.to_string(), value.trim().to_string(), line, column));
    }
    Ok(blocks)
}

fn parse_num<T: std::str::FromStr>(v: &str, line: usize, what: &str) -> Result<T, ScenarioError> {
    v.parse().or_else(|_| fail(line, format!("`{what}` expects a number, got `{v}`")))
}

fn parse_finite(v: &str, line: usize, what: &str) -> Result<f64, ScenarioError> {
    let x: f64 = parse_num(v, line, what)?;
    if !x.is_finite() {
        return fail(line, format!("`{what}` must be finite"));
    }
    Ok(x)
}

pub(crate) fn parse_list(v: &str, line: usize, what: &str) -> Result<Vec<f64>, ScenarioError> {
    v.split(',').map(|s| parse_finite(s.trim(), line, what)).collect()
}

fn parse_range(v: &str, line: usize) -> Result<(f64, f64), ScenarioError> {
    let Some((a, b)) = v.split_once("..") else {
        return fail(line, format!("action range `{v}` should look like `lo..hi`"));
    };
    Ok((parse_finite(a.trim(), line, "actions")?, parse_finite(b.trim(), line, "actions")?))
}

fn parse_space(block: &Block) -> Result<SpaceSpec, ScenarioError> {
    let mut spec = SpaceSpec { dim: 0, lo: vec![], hi: vec![], truncation: 8, grid: 33, shrink: 0.1, eps_max: 0.5 };
    let mut ranges = None;
    for (key, value, line, _) in &block.entries {
        let line = *line;
        match key.as_str() {
            "dim" => spec.dim = parse_num(value, line, "dim")?,
            "actions" => {
                let r: Vec<(f64, f64)> = value.split(',').map(|s| parse_range(s.trim(), line)).collect::<Result<_, _>>()?;
                ranges = Some((r, line));
            }
            "truncation" => spec.truncation = parse_num(value, line, "truncation")?,
            "grid" => spec.grid = parse_num(value, line, "grid")?,
            "shrink" => spec.shrink = parse_finite(value, line, "shrink")?,
            "eps_max" => spec.eps_max = parse_finite(value, line, "eps_max")?,
            other => return fail(line, format!("unknown key `{other}` in [space]")),
        }
    }
    if !(1..=3).contains(&spec.dim) {
        return fail(block.line, "[space] needs `dim` between 1 and 3");
    }
    let Some((ranges, line)) = ranges else {
        return fail(block.line, "[space] needs `actions = lo..hi`");
    };
    let ranges = match ranges.len() {
        1 => vec![ranges[0]; spec.dim],
        n if n == spec.dim => ranges,
        n => return fail(line, format!("{n} action ranges for dimension {}", spec.dim)),
    };
    (spec.lo, spec.hi) = ranges.into_iter().unzip();
    if !(0.0..0.5).contains(&spec.shrink) {
        return fail(block.line, "`shrink` must lie in [0, 0.5)");
    }
    if spec.eps_max <= 0.0 {
        return fail(block.line, "`eps_max` must be positive");
    }
    Ok(spec)
}

fn expression(value: &str, line: usize, column: usize, dim: usize) -> Result<Expr, ScenarioError> {
    parse_expression(value, dim).map_err(|e: ParseError| ScenarioError {
        line: line + e.line - 1,
        column: Some(if e.line == 1 { column + e.column - 1 } else { e.column }),
        message: e.to_string(),
    })
}

/// Parses scenario text; every referenced name must be defined above its use.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let blocks = split_blocks(text)?;
    let mut name = None;
    let mut seed = None;
    for (key, value, line, _) in &blocks[0].entries {
        match key.as_str() {
            "name" => name = Some(value.clone()),
            "seed" => seed = Some(parse_num(value, *line, "seed")?),
            other => return fail(*line, format!("unknown top-level key `{other}`")),
        }
    }
    let mut space = None;
    let mut fields: Vec<FieldDef> = Vec::new();
    let mut vectors: Vec<VectorDef> = Vec::new();
    let mut tasks = Vec::new();
    let mut names = BTreeSet::new();
    for block in &blocks[1..] {
        let need_space = |space: &Option<SpaceSpec>| -> Result<usize, ScenarioError> {
            match space {
                Some(s) => Ok(s.dim),
                None => fail(block.line, "the [space] block must come first"),
            }
        };
        match &block.section {
            Section::Top => unreachable!("only the first block is top-level"),
            Section::Space => {
                if space.is_some() {
                    return fail(block.line, "duplicate [space] block");
                }
                space = Some(parse_space(block)?);
            }
            Section::Field(n) => {
                let dim = need_space(&space)?;
                if !names.insert(n.clone()) {
                    return fail(block.line, format!("`{n}` is already defined"));
                }
                let mut expr = None;
                for (key, value, line, column) in &block.entries {
                    if key != "expr" {
                        return fail(*line, format!("unknown key `{key}` in [field {n}]"));
                    }
                    expr = Some((value.clone(), expression(value, *line, *column, dim)?));
                }
                let Some((text, expr)) = expr else {
                    return fail(block.line, format!("[field {n}] needs `expr`"));
                };
                fields.push(FieldDef { name: n.clone(), text, expr });
            }
            Section::Vector(n) => {
                let dim = need_space(&space)?;
                if !names.insert(n.clone()) {
                    return fail(block.line, format!("`{n}` is already defined"));
                }
                let mut v = VectorDef { name: n.clone(), hamiltonian: None, angle: vec![None; dim], action: vec![None; dim] };
                for (key, value, line, _) in &block.entries {
                    if fields.iter().all(|f| &f.name != value) {
                        return fail(*line, format!("`{value}` is not a field defined above"));
                    }
                    let slot = if key == "hamiltonian" {
                        &mut v.hamiltonian
                    } else {
                        let (comp, idx) = match (key.strip_prefix("angle"), key.strip_prefix("action")) {
                            (Some(i), _) => (&mut v.angle, i),
                            (_, Some(i)) => (&mut v.action, i),
                            _ => return fail(*line, format!("unknown key `{key}` in [vector {n}]")),
                        };
                        match idx.parse::<usize>() {
                            Ok(j) if (1..=dim).contains(&j) && !idx.starts_with('0') => &mut comp[j - 1],
                            _ => return fail(*line, format!("unknown key `{key}` in [vector {n}]")),
                        }
                    };
                    *slot = Some(value.clone());
                }
                if v.hamiltonian.is_none() && v.angle.iter().chain(&v.action).all(Option::is_none) {
                    return fail(block.line, format!("[vector {n}] has no components"));
                }
                vectors.push(v);
            }
            Section::Task(kind) => {
                need_space(&space)?;
                tasks.push(parse_task(*kind, block, &fields, &vectors)?);
            }
        }
    }
    let Some(space) = space else {
        return fail(1, "missing [space] block");
    };
    if tasks.is_empty() {
        return fail(text.lines().count().max(1), "scenario has no [task] blocks");
    }
    Ok(Scenario { name, seed, space, fields, vectors, tasks })
}

fn parse_task(kind: TaskKind, block: &Block, fields: &[FieldDef], vectors: &[VectorDef]) -> Result<TaskDef, ScenarioError> {
    let mut task =
        TaskDef { kind, line: block.line, label: None, inputs: BTreeMap::new(), tolerances: BTreeMap::new(), output: None };
    let is_field = |v: &str| fields.iter().any(|f| f.name == v);
    let is_vector = |v: &str| vectors.iter().any(|f| f.name == v);
    for (key, value, line, _) in &block.entries {
        let line = *line;
        if let Some(id) = key.strip_prefix("tol.") {
            if !kind.check_ids().contains(&id) {
                return fail(line, format!("task {} has no check `{id}`", kind.name()));
            }
            task.tolerances.insert(id.to_string(), parse_finite(value, line, key)?);
            continue;
        }
        match key.as_str() {
            "label" => task.label = Some(value.clone()),
            "output" => task.output = Some(value.clone()),
            k if kind.keys().contains(&k) => {
                let ok = match k {
                    "input" => is_field(value) || is_vector(value),
                    "generator" => is_vector(value),
                    "expect_hamiltonian" | "expect_g" | "base" | "shift" => is_field(value),
                    "eps" | "constants" | "offsets" => parse_list(value, line, k).is_ok(),
                    "speed" => parse_finite(value, line, k).is_ok(),
                    "points" | "base_points" | "samples" => value.parse::<usize>().is_ok_and(|n| n > 0),
                    "potential" => matches!(value.as_str(), "canonical" | "shifted"),
                    "suite" => (1..=7).any(|i| i.to_string() == *value)
                        || toravg_core::verify::SUITE_NAMES.contains(&value.as_str()),
                    _ => true,
                };
                if !ok {
                    return fail(line, format!("invalid value `{value}` for `{k}` in task {}", kind.name()));
                }
                task.inputs.insert(k.to_string(), value.clone());
            }
            other => return fail(line, format!("unknown key `{other}` in task {}", kind.name())),
        }
    }
    let required: &[&str] = match kind {
        TaskKind::Average | TaskKind::Decompose => &["input"],
        TaskKind::FlowDecompose => &["generator"],
        TaskKind::NormalForm => &["generator", "base"],
        TaskKind::VerifyPeriods => &[],
        TaskKind::PropertySuite => &["suite"],
    };
    if let Some(missing) = required.iter().find(|k| !task.inputs.contains_key(**k)) {
        return fail(block.line, format!("task {} needs `{missing}`", kind.name()));
    }
    if kind == TaskKind::Decompose && !is_vector(task.get("input").unwrap_or_default()) {
        return fail(block.line, "task decompose takes a vector input");
    }
    if task.get("potential") == Some("shifted") && task.get("shift").is_none() {
        return fail(block.line, "a shifted potential needs `shift`");
    }
    Ok(task)
}
