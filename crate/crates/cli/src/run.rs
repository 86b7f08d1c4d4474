//! Executes scenario tasks in order and assembles the JSON report.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use toravg_core::averaging::{is_g_invariant, is_lift, vertical_average};
use toravg_core::decomposition::decompose_symplectic;
use toravg_core::deformation::{normal_form_from, normal_form_residual, DeformationScenario};
use toravg_core::field::{closedness_defect, d_scalar, hamiltonian_vf, omega_flat};
use toravg_core::flow::{decompose_flow, integrate_flow, TimeDepVectorField, DEFAULT_SAMPLES, SYMPLECTIC_TOL};
use toravg_core::periods::{
    action_function, independence_determinant, lattice_section, verify_one_periodic, winding_numbers, CycleFamily,
    Reparametrization, SymplecticPotential,
};
use toravg_core::random::{rng, RNG_NAME};
use toravg_core::verify::{point_distance, run_suite, SuiteConfig, SUITE_NAMES};
use toravg_core::{ActionBox, Error, ScalarField, TorusBox, VectorField};

use crate::compile::{compile_field, truncation_loss};
use crate::scenario::{parse_list, FieldDef, Scenario, TaskDef, TaskKind};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Overrides the scenario's `seed`.
    pub seed: Option<u64>,
    pub tol_scale: f64,
    /// Task `output` paths resolve against this directory.
    pub output_dir: Option<PathBuf>,
    /// Echoed as `scenario.source`.
    pub source: Option<String>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { seed: None, tol_scale: 1.0, output_dir: None, source: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOut {
    pub id: String,
    /// `null` when the measurement is not finite.
    pub value: f64,
    pub tol: f64,
    /// `upper`: passes when `value < tol`; `lower`: when `value >= tol`; `flag`: value 0 or 1.
    pub bound: &'static str,
    pub pass: bool,
}

impl CheckOut {
    fn upper(id: &str, value: f64, tol: f64) -> Self {
        Self { id: id.into(), value, tol, bound: "upper", pass: value < tol }
    }

    fn lower(id: &str, value: f64, tol: f64) -> Self {
        Self { id: id.into(), value, tol, bound: "lower", pass: value >= tol }
    }

    fn flag(id: &str, ok: bool) -> Self {
        Self { id: id.into(), value: if ok { 0.0 } else { 1.0 }, tol: 0.5, bound: "flag", pass: ok }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub kind: &'static str,
    pub label: Option<String>,
    pub line: usize,
    pub inputs: BTreeMap<String, String>,
    pub checks: Vec<CheckOut>,
    pub data: Value,
    pub pass: bool,
    pub error: Option<String>,
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldEcho {
    pub name: String,
    pub expr: String,
    pub eps_dependent: bool,
    /// Relative spectral tail at `eps = 0`.
    pub truncation_tail: Option<f64>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VectorEcho {
    pub name: String,
    pub hamiltonian: Option<String>,
    pub angle: Vec<Option<String>>,
    pub action: Vec<Option<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceEcho {
    pub dim: usize,
    pub action_lo: Vec<f64>,
    pub action_hi: Vec<f64>,
    pub truncation: usize,
    pub grid: usize,
    pub shrink: f64,
    pub eps_max: f64,
    pub safe_lo: Vec<f64>,
    pub safe_hi: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioEcho {
    pub name: Option<String>,
    pub source: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: ScenarioEcho,
    pub seed: u64,
    pub rng: &'static str,
    pub tol_scale: f64,
    pub space: SpaceEcho,
    pub fields: Vec<FieldEcho>,
    pub vectors: Vec<VectorEcho>,
    pub tasks: Vec<TaskReport>,
    pub pass: bool,
    pub exit_code: i32,
    pub timing: Timing,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

type TaskResult = std::result::Result<(Vec<CheckOut>, Value), String>;

struct Ctx<'a> {
    sc: &'a Scenario,
    space: TorusBox,
    safe: ActionBox,
    seed: u64,
    opts: &'a RunOptions,
    cache: BTreeMap<String, ScalarField>,
}

fn err(e: Error) -> String {
    e.to_string()
}

fn action_nodes(space: &TorusBox) -> Vec<Vec<f64>> {
    (0..space.d).map(|j| (0..space.grid_points).map(|i| space.action_node(j, i)).collect()).collect()
}

impl Ctx<'_> {
    fn def(&self, name: &str) -> std::result::Result<&FieldDef, String> {
        self.sc.field(name).ok_or_else(|| format!("no field `{name}`"))
    }

    fn field_at(&self, name: &str, eps: f64) -> std::result::Result<ScalarField, String> {
        if let Some(f) = self.cache.get(name) {
            return Ok(f.clone());
        }
        compile_field(&self.def(name)?.expr, &self.space, eps).map_err(err)
    }

    fn eps_free_field(&self, name: &str) -> std::result::Result<ScalarField, String> {
        if self.def(name)?.expr.depends_on_eps() {
            return Err(format!("field `{name}` depends on eps where a fixed field is required"));
        }
        self.field_at(name, 0.0)
    }

    fn vector_depends_on_eps(&self, name: &str) -> bool {
        self.sc.vector(name).is_some_and(|v| {
            v.hamiltonian.iter().chain(v.angle.iter().flatten()).chain(v.action.iter().flatten()).any(|f| {
                self.sc.field(f).is_some_and(|d| d.expr.depends_on_eps())
            })
        })
    }

    fn vector_at(&self, name: &str, eps: f64) -> std::result::Result<VectorField, String> {
        let v = self.sc.vector(name).ok_or_else(|| format!("no vector `{name}`"))?;
        let comp = |slot: &Option<String>| match slot {
            Some(f) => self.field_at(f, eps),
            None => Ok(ScalarField::zero(&self.space)),
        };
        let angle = v.angle.iter().map(comp).collect::<std::result::Result<Vec<_>, _>>()?;
        let action = v.action.iter().map(comp).collect::<std::result::Result<Vec<_>, _>>()?;
        let mut x = VectorField::new(&self.space, angle, action).map_err(err)?;
        if let Some(h) = &v.hamiltonian {
            x = &x + &hamiltonian_vf(&self.field_at(h, eps)?);
        }
        Ok(x)
    }

    fn eps_free_vector(&self, name: &str) -> std::result::Result<VectorField, String> {
        if self.vector_depends_on_eps(name) {
            return Err(format!("vector `{name}` depends on eps where a fixed field is required"));
        }
        self.vector_at(name, 0.0)
    }

    /// The symplectic flag is set whenever every sample passes the closedness check.
    fn generator(&self, name: &str) -> std::result::Result<TimeDepVectorField, String> {
        let eps_max = self.sc.space.eps_max;
        if !self.vector_depends_on_eps(name) {
            let x = self.vector_at(name, 0.0)?;
            let symplectic = closedness_defect(&omega_flat(&x)) < SYMPLECTIC_TOL;
            return TimeDepVectorField::constant(x, eps_max, symplectic).map_err(err);
        }
        let build = |flag| {
            TimeDepVectorField::sampled(&self.space, eps_max, DEFAULT_SAMPLES, flag, |e| {
                self.vector_at(name, e).map_err(Error::Precondition)
            })
        };
        match build(true) {
            Err(Error::NotSymplectic { .. }) => build(false).map_err(err),
            other => other.map_err(err),
        }
    }

    fn upper(&self, t: &TaskDef, id: &str, value: f64, default: f64) -> CheckOut {
        CheckOut::upper(id, value, t.tolerances.get(id).copied().unwrap_or(default) * self.opts.tol_scale)
    }

    fn lower(&self, t: &TaskDef, id: &str, value: f64, default: f64) -> CheckOut {
        CheckOut::lower(id, value, t.tolerances.get(id).copied().unwrap_or(default))
    }

    fn eps_list(&self, t: &TaskDef) -> Vec<f64> {
        t.get("eps").and_then(|v| parse_list(v, t.line, "eps").ok()).unwrap_or_else(|| vec![0.1, 0.25, 0.5])
    }

    fn write_output(&self, t: &TaskDef, value: &Value) -> std::result::Result<Option<String>, String> {
        let Some(rel) = &t.output else {
            return Ok(None);
        };
        let path = match &self.opts.output_dir {
            Some(dir) => dir.join(rel),
            None => PathBuf::from(rel),
        };
        let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
        std::fs::write(&path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        Ok(Some(rel.clone()))
    }

    fn run_task(&self, index: usize, t: &TaskDef) -> TaskResult {
        let (checks, mut data, output) = match t.kind {
            TaskKind::Average => self.average(t)?,
            TaskKind::Decompose => self.decompose(t)?,
            TaskKind::FlowDecompose => self.flow_decompose(index, t)?,
            TaskKind::NormalForm => self.normal_form(t)?,
            TaskKind::VerifyPeriods => self.verify_periods(index, t)?,
            TaskKind::PropertySuite => self.property_suite(t)?,
        };
        if let Some(path) = self.write_output(t, &output)? {
            data["output"] = json!(path);
        }
        Ok((checks, data))
    }

    fn average(&self, t: &TaskDef) -> std::result::Result<(Vec<CheckOut>, Value, Value), String> {
        let input = t.get("input").unwrap_or_default();
        if self.sc.field(input).is_some() {
            let f = self.eps_free_field(input)?;
            let avg = vertical_average(&f);
            let idem = (&vertical_average(&avg) - &avg).sup_norm();
            let d_comm = (&vertical_average(&d_scalar(&f)) - &d_scalar(&avg)).sup_norm();
            // Trapezoid oracle on a finer grid than the spectral one.
            let m = 4 * self.space.truncation + 1;
            let npts = self.space.n_actions();
            let samples = f.samples(m);
            let cells = samples.len() / npts;
            let mut quad = 0.0f64;
            for (p, v) in avg.average_values().iter().enumerate() {
                let mean = (0..cells).map(|a| samples[a * npts + p]).sum::<f64>() / cells as f64;
                quad = quad.max((mean - v).abs());
            }
            let checks = vec![
                self.upper(t, "idempotence", idem, 1e-14),
                self.upper(t, "d_commutes", d_comm, 1e-10),
                self.upper(t, "quadrature", quad, 1e-12),
            ];
            let data = json!({
                "kind": "scalar",
                "action_nodes": action_nodes(&self.space),
                "average": avg.average_values(),
            });
            return Ok((checks, data, serde_json::to_value(avg.to_record()).map_err(|e| e.to_string())?));
        }
        let x = self.eps_free_vector(input)?;
        let avg = vertical_average(&x);
        let idem = (&vertical_average(&avg) - &avg).sup_norm();
        let compat = (&omega_flat(&avg) - &vertical_average(&omega_flat(&x))).sup_norm();
        let checks = vec![
            self.upper(t, "idempotence", idem, 1e-14),
            self.upper(t, "omega_compatibility", compat, 1e-12),
            CheckOut::flag("invariant", is_g_invariant(&avg, 1e-10)),
        ];
        let comps = |v: &[ScalarField]| v.iter().map(ScalarField::average_values).collect::<Vec<_>>();
        let data = json!({
            "kind": "vector",
            "action_nodes": action_nodes(&self.space),
            "angle_average": comps(&avg.angle_comp),
            "action_average": comps(&avg.action_comp),
        });
        let records = |v: &[ScalarField]| v.iter().map(ScalarField::to_record).collect::<Vec<_>>();
        let output = json!({ "angle": records(&avg.angle_comp), "action": records(&avg.action_comp) });
        Ok((checks, data, output))
    }

    fn decompose(&self, t: &TaskDef) -> std::result::Result<(Vec<CheckOut>, Value, Value), String> {
        let x = self.eps_free_vector(t.get("input").unwrap_or_default())?;
        let (a, x2) = decompose_symplectic(&x).map_err(err)?;
        let recon = (&(&hamiltonian_vf(&a) + &x2) - &x).sup_norm();
        let lift = is_lift(&x2, 1e-10);
        let mut checks = vec![
            self.upper(t, "reconstruction", recon, 1e-8),
            self.upper(t, "a_zero_average", a.average().sup_norm(), 1e-12),
            self.upper(t, "closed_lift", closedness_defect(&omega_flat(&x2)), 1e-8),
            CheckOut::flag("lift", lift.is_some()),
            CheckOut::flag("invariant", is_g_invariant(&x2, 1e-10)),
        ];
        if let Some(name) = t.get("expect_hamiltonian") {
            let h = self.eps_free_field(name)?;
            let osc = &h - &h.average();
            checks.push(self.upper(t, "hamiltonian_match", (&a - &osc).sup_norm(), 1e-8));
        }
        if t.tolerances.contains_key("a_norm") {
            checks.push(self.upper(t, "a_norm", a.sup_norm(), 0.0));
        }
        let data = json!({
            "a_sup_norm": a.sup_norm(),
            "action_nodes": action_nodes(&self.space),
            "lift_base": lift.map(|b| b.components),
        });
        Ok((checks, data, json!({ "a": a.to_record() })))
    }

    fn flow_decompose(&self, index: usize, t: &TaskDef) -> std::result::Result<(Vec<CheckOut>, Value, Value), String> {
        let gen = self.generator(t.get("generator").unwrap_or_default())?;
        let dec = decompose_flow(&gen, &self.safe).map_err(err)?;
        let eps_list = self.eps_list(t);
        let n: usize = t.get("points").and_then(|v| v.parse().ok()).unwrap_or(50);
        let inner = dec.hamiltonian_flow(eps_list.first().copied().unwrap_or(0.0)).map_err(err)?.safe_box().clone();
        let points = random_points(self.seed.wrapping_add(index as u64), &inner, n);
        let expect = t.get("expect_g").map(|name| self.def(name)).transpose()?;
        let (mut zero_avg, mut recomp, mut g_match) = (0.0f64, 0.0f64, 0.0f64);
        let mut rows = Vec::new();
        let mut records = Vec::new();
        for &eps in &eps_list {
            let g = dec.g_at(eps).map_err(err)?;
            let za = g.average().sup_norm();
            let direct = integrate_flow(&gen, eps, &self.safe).and_then(|f| f.apply(&points)).map_err(err)?;
            let split = dec
                .hamiltonian_flow(eps)
                .and_then(|h| h.apply(&points))
                .and_then(|mid| dec.fiber_flow(eps)?.apply(&mid))
                .map_err(err)?;
            let rc = direct.iter().zip(&split).map(|(p, q)| point_distance(p, q, self.space.d)).fold(0.0, f64::max);
            let mut row = json!({ "eps": eps, "g_sup_norm": g.sup_norm(), "g_zero_average": za, "recomposition": rc });
            if let Some(def) = expect {
                let target = compile_field(&def.expr, g.space(), eps).map_err(err)?;
                let e = (&g - &target).sup_norm();
                row["g_match"] = json!(e);
                g_match = g_match.max(e);
            }
            zero_avg = zero_avg.max(za);
            recomp = recomp.max(rc);
            rows.push(row);
            records.push(json!({ "eps": eps, "g": g.to_record() }));
        }
        let mut checks = vec![
            self.upper(t, "g_zero_average", zero_avg, 1e-12),
            self.upper(t, "recomposition", recomp, 1e-6),
        ];
        if expect.is_some() {
            checks.push(self.upper(t, "g_match", g_match, 1e-6));
        }
        let data = json!({ "points": n, "per_eps": rows });
        Ok((checks, data, Value::Array(records)))
    }

    fn normal_form(&self, t: &TaskDef) -> std::result::Result<(Vec<CheckOut>, Value, Value), String> {
        let gen = self.generator(t.get("generator").unwrap_or_default())?;
        let base = self.def(t.get("base").unwrap_or_default())?;
        let scenario = if base.expr.depends_on_eps() {
            DeformationScenario::from_base_fn(gen.clone(), self.safe.clone(), |e| compile_field(&base.expr, &self.space, e))
        } else {
            DeformationScenario::with_fixed_base(&self.eps_free_field(&base.name)?, gen.clone(), self.safe.clone())
        }
        .map_err(err)?;
        let dec = decompose_flow(&gen, &self.safe).map_err(err)?;
        let (mut residual, mut angle, mut zero_avg) = (0.0f64, 0.0f64, 0.0f64);
        let mut rows = Vec::new();
        let mut records = Vec::new();
        let mut nodes = Value::Null;
        for eps in self.eps_list(t) {
            let nf = normal_form_from(&scenario, dec.clone(), eps).map_err(err)?;
            let r = normal_form_residual(&scenario, &nf).map_err(err)?;
            let a = nf.angle_dependence();
            let za = nf.g.average().sup_norm();
            residual = residual.max(r);
            angle = angle.max(a);
            zero_avg = zero_avg.max(za);
            nodes = json!(action_nodes(nf.i_nf.space()));
            rows.push(json!({
                "eps": eps,
                "residual": r,
                "angle_dependence": a,
                "g_zero_average": za,
                "i_nf": nf.i_nf.average_values(),
            }));
            records.push(json!({ "eps": eps, "i_nf": nf.i_nf.to_record(), "g": nf.g.to_record() }));
        }
        let checks = vec![
            self.upper(t, "residual", residual, 1e-5),
            self.upper(t, "angle_independence", angle, 1e-7),
            self.upper(t, "g_zero_average", zero_avg, 1e-12),
        ];
        let data = json!({ "action_nodes": nodes, "per_eps": rows });
        Ok((checks, data, Value::Array(records)))
    }

    fn verify_periods(&self, index: usize, t: &TaskDef) -> std::result::Result<(Vec<CheckOut>, Value, Value), String> {
        let d = self.space.d;
        let list = |key: &str| -> std::result::Result<Vec<f64>, String> {
            let v = match t.get(key) {
                Some(v) => parse_list(v, t.line, key).map_err(|e| e.message)?,
                None => vec![0.0; d],
            };
            if v.len() != d {
                return Err(format!("`{key}` needs {d} values"));
            }
            Ok(v)
        };
        let lambda = match t.get("potential").unwrap_or("canonical") {
            "shifted" => {
                let g = self.eps_free_field(t.get("shift").unwrap_or_default())?;
                SymplecticPotential::shifted(&g, &list("constants")?).map_err(err)?
            }
            _ => SymplecticPotential::canonical(&self.space),
        };
        let offsets = list("offsets")?;
        let speed: f64 = t.get("speed").and_then(|v| v.parse().ok()).unwrap_or(0.0);
        let per_axis: usize = t.get("base_points").and_then(|v| v.parse().ok()).unwrap_or(5);
        let sections = (0..d)
            .map(|j| {
                let reparam = if speed == 0.0 { Reparametrization::identity() } else { Reparametrization::sine(speed) };
                let gamma = CycleFamily::coordinate(j, offsets.clone()).with_speed(reparam);
                lattice_section(&action_function(&lambda, &gamma)?)
            })
            .collect::<toravg_core::Result<Vec<_>>>()
            .map_err(err)?;
        let bases = self.safe.grid(per_axis);
        let mut r = rng(self.seed.wrapping_add(index as u64));
        let points: Vec<Vec<f64>> = bases
            .iter()
            .map(|b| {
                let mut p: Vec<f64> = (0..d).map(|_| r.random_range(0.0..1.0)).collect();
                p.extend_from_slice(b);
                p
            })
            .collect();
        let mut periodic = 0.0f64;
        let mut identity = true;
        let mut first = Vec::new();
        for (j, x) in sections.iter().enumerate() {
            periodic = periodic.max(verify_one_periodic(x, &points).map_err(err)?);
            for (i, p) in points.iter().enumerate() {
                let w = winding_numbers(x, p).map_err(err)?;
                identity &= w.iter().enumerate().all(|(k, &n)| n == i64::from(k == j));
                if i == 0 {
                    first.push(w);
                }
            }
        }
        let mut det = f64::INFINITY;
        for b in &bases {
            det = det.min(independence_determinant(&sections, b).map_err(err)?);
        }
        let checks = vec![
            self.upper(t, "one_periodicity", periodic, 1e-8),
            CheckOut::flag("winding_identity", identity),
            self.lower(t, "independence_determinant", det, 0.5),
        ];
        let data = json!({ "base_points": bases.len(), "winding": first, "min_determinant": det });
        let comps: Vec<Vec<Vec<f64>>> =
            sections.iter().map(|x| x.action_comp.iter().map(ScalarField::average_values).collect()).collect();
        Ok((checks, data, json!({ "section_action_components": comps })))
    }

    fn property_suite(&self, t: &TaskDef) -> std::result::Result<(Vec<CheckOut>, Value, Value), String> {
        let s = t.get("suite").unwrap_or_default();
        let id = s
            .parse::<u8>()
            .ok()
            .or_else(|| SUITE_NAMES.iter().position(|n| *n == s).map(|i| i as u8 + 1))
            .ok_or_else(|| format!("unknown suite `{s}`"))?;
        let samples = t.get("samples").and_then(|v| v.parse().ok()).unwrap_or(100);
        let config = SuiteConfig { seed: self.seed, samples, tol_scale: self.opts.tol_scale };
        let report = run_suite(id, &config);
        let mut errors = Vec::new();
        let checks = report
            .checks
            .iter()
            .map(|c| {
                if let Some(e) = &c.error {
                    errors.push(e.clone());
                }
                CheckOut {
                    id: snake_case(&c.name),
                    value: c.value,
                    tol: c.tol,
                    bound: if c.lower_bound { "lower" } else { "upper" },
                    pass: c.pass,
                }
            })
            .collect();
        if !errors.is_empty() {
            return Err(errors.join("; "));
        }
        let data = json!({ "suite": id, "name": report.name, "samples": samples });
        Ok((checks, data, Value::Null))
    }
}

fn snake_case(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect::<String>()
        .split('_')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

fn random_points(seed: u64, bx: &ActionBox, n: usize) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let d = bx.dim();
    (0..n)
        .map(|_| {
            let mut p: Vec<f64> = (0..d).map(|_| r.random_range(0.0..1.0)).collect();
            p.extend((0..d).map(|j| r.random_range(bx.lo[j]..bx.hi[j])));
            p
        })
        .collect()
}

/// Runs every task of `sc` in order. Scenario-level failures (a bad space) are returned as errors;
/// task failures are recorded in the report.
pub fn run_scenario(sc: &Scenario, opts: &RunOptions) -> toravg_core::Result<Report> {
    let start = Instant::now();
    let spec = &sc.space;
    let space = TorusBox::new(spec.lo.clone(), spec.hi.clone(), spec.truncation, spec.grid)?;
    let safe = space.action_box().shrink(spec.shrink);
    let seed = opts.seed.or(sc.seed).unwrap_or(0);

    let mut fields = Vec::new();
    let mut cache = BTreeMap::new();
    for f in &sc.fields {
        let eps_dependent = f.expr.depends_on_eps();
        let (tail, warning) = match truncation_loss(&f.expr, &space, 0.0) {
            Ok(rep) => (Some(rep.tail), rep.warning),
            Err(e) => (None, Some(e.to_string())),
        };
        if !eps_dependent {
            if let Ok(c) = compile_field(&f.expr, &space, 0.0) {
                cache.insert(f.name.clone(), c);
            }
        }
        fields.push(FieldEcho { name: f.name.clone(), expr: f.text.clone(), eps_dependent, truncation_tail: tail, warning });
    }
    let vectors = sc
        .vectors
        .iter()
        .map(|v| VectorEcho {
            name: v.name.clone(),
            hamiltonian: v.hamiltonian.clone(),
            angle: v.angle.clone(),
            action: v.action.clone(),
        })
        .collect();

    let ctx = Ctx { sc, space: space.clone(), safe: safe.clone(), seed, opts, cache };
    let tasks: Vec<TaskReport> = sc
        .tasks
        .iter()
        .enumerate()
        .map(|(index, t)| {
            let t0 = Instant::now();
            let (checks, data, error) = match ctx.run_task(index, t) {
                Ok((c, d)) => (c, d, None),
                Err(e) => (Vec::new(), Value::Null, Some(e)),
            };
            let pass = error.is_none() && checks.iter().all(|c| c.pass);
            TaskReport {
                index,
                kind: t.kind.name(),
                label: t.label.clone(),
                line: t.line,
                inputs: t.inputs.clone(),
                checks,
                data,
                pass,
                error,
                timing: Timing { seconds: t0.elapsed().as_secs_f64() },
            }
        })
        .collect();
    let pass = tasks.iter().all(|t| t.pass);
    Ok(Report {
        schema: SCHEMA_VERSION,
        tool: "toravg",
        version: env!("CARGO_PKG_VERSION"),
        scenario: ScenarioEcho { name: sc.name.clone(), source: opts.source.clone() },
        seed,
        rng: RNG_NAME,
        tol_scale: opts.tol_scale,
        space: SpaceEcho {
            dim: spec.dim,
            action_lo: spec.lo.clone(),
            action_hi: spec.hi.clone(),
            truncation: spec.truncation,
            grid: spec.grid,
            shrink: spec.shrink,
            eps_max: spec.eps_max,
            safe_lo: safe.lo,
            safe_hi: safe.hi,
        },
        fields,
        vectors,
        tasks,
        pass,
        exit_code: if pass { 0 } else { 1 },
        timing: Timing { seconds: start.elapsed().as_secs_f64() },
    })
}
