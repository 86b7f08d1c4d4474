//! Classical RK4 integration of `dy/deps = X_eps(y)` together with the variational
//! equation `dJ/deps = DX_eps(y) J`, with Richardson step control.

use rayon::prelude::*;

use super::family::{check_time, TimeDepVectorField};
use crate::error::{Error, Result};
use crate::field::{PointContext, VectorField};
use crate::space::{wrap_unit, ActionBox, TorusBox};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Richardson error target per coordinate and Jacobian entry.
    pub tol: f64,
    pub initial_steps: usize,
    /// Step-count ceiling; exceeding it is [`Error::StepFloor`].
    pub max_steps: usize,
    /// Skip step control and take exactly this many steps.
    pub fixed_steps: Option<usize>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { tol: 1e-9, initial_steps: 64, max_steps: 100_000, fixed_steps: None }
    }
}

/// Final state of one trajectory: coordinates `(theta, I)` with unwrapped angles and,
/// when requested, the row-major Jacobian of the map.
#[derive(Debug, Clone)]
pub(crate) struct Endpoint {
    pub state: Vec<f64>,
    pub jac: Option<Vec<f64>>,
}

struct Batch<'a> {
    generator: &'a TimeDepVectorField,
    starts: &'a [Vec<f64>],
    jacobian: bool,
    n: usize,
}

struct Scratch {
    dx: Vec<f64>,
    tmp: Vec<f64>,
    k: [Vec<f64>; 4],
}

impl Scratch {
    fn new(n: usize, dim: usize) -> Self {
        Self { dx: vec![0.0; n * n], tmp: vec![0.0; dim], k: std::array::from_fn(|_| vec![0.0; dim]) }
    }
}

impl Batch<'_> {
    fn dim(&self) -> usize {
        self.n + if self.jacobian { self.n * self.n } else { 0 }
    }

    fn initial(&self) -> Vec<Vec<f64>> {
        self.starts
            .iter()
            .map(|p| {
                let mut y = p.clone();
                if self.jacobian {
                    for r in 0..self.n {
                        for c in 0..self.n {
                            y.push(if r == c { 1.0 } else { 0.0 });
                        }
                    }
                }
                y
            })
            .collect()
    }

    fn rhs(&self, x: &VectorField, y: &[f64], start: &[f64], t: f64, scratch: &mut Scratch, out: &mut [f64]) -> Result<()> {
        let (n, d) = (self.n, self.n / 2);
        let space = x.space();
        if !space.contains_actions(&y[d..n]) || y[..n].iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainEscape { start: start.to_vec(), at: y[..n].to_vec(), time: t });
        }
        let ctx = PointContext::new(space, &y[..d], &y[d..n])?;
        if self.jacobian {
            x.eval_into(&ctx, &mut out[..n], Some(&mut scratch.dx));
            let (dx, j) = (&scratch.dx, &y[n..]);
            for r in 0..n {
                for c in 0..n {
                    out[n + r * n + c] = (0..n).map(|k| dx[r * n + k] * j[k * n + c]).sum();
                }
            }
        } else {
            x.eval_into(&ctx, &mut out[..n], None);
        }
        Ok(())
    }

    fn run(&self, t0: f64, t1: f64, steps: usize) -> Result<Vec<Vec<f64>>> {
        let mut states = self.initial();
        let h = (t1 - t0) / steps as f64;
        let time = |s: f64| if s == steps as f64 { t1 } else { t0 + s * h };
        let mut f0 = self.generator.field_at(t0)?;
        let dim = self.dim();
        for s in 0..steps {
            let (ta, tm, tb) = (time(s as f64), time(s as f64 + 0.5), time(s as f64 + 1.0));
            let fm = self.generator.field_at(tm)?;
            let f1 = self.generator.field_at(tb)?;
            states.par_iter_mut().zip(self.starts.par_iter()).try_for_each_init(
                || Scratch::new(self.n, dim),
                |sc, (y, start)| -> Result<()> {
                    let mut k = std::mem::take(&mut sc.k);
                    let mut tmp = std::mem::take(&mut sc.tmp);
                    let stages: [(&VectorField, f64, f64); 4] = [(&f0, 0.0, ta), (&fm, 0.5 * h, tm), (&fm, 0.5 * h, tm), (&f1, h, tb)];
                    let mut result = Ok(());
                    for (i, &(field, c, t)) in stages.iter().enumerate() {
                        if i == 0 {
                            tmp.copy_from_slice(y);
                        } else {
                            for u in 0..dim {
                                tmp[u] = y[u] + c * k[i - 1][u];
                            }
                        }
                        result = self.rhs(field, &tmp, start, t, sc, &mut k[i]);
                        if result.is_err() {
                            break;
                        }
                    }
                    if result.is_ok() {
                        for u in 0..dim {
                            y[u] += h / 6.0 * (k[0][u] + 2.0 * (k[1][u] + k[2][u]) + k[3][u]);
                        }
                    }
                    sc.k = k;
                    sc.tmp = tmp;
                    result
                },
            )?;
            f0 = f1;
        }
        // The endpoint itself must lie in the box as well.
        let d = self.n / 2;
        for (y, start) in states.iter().zip(self.starts) {
            if !self.generator.space().contains_actions(&y[d..self.n]) {
                return Err(Error::DomainEscape { start: start.clone(), at: y[..self.n].to_vec(), time: t1 });
            }
        }
        Ok(states)
    }
}

/// Integrates every start point from `t0` to `t1` (either order).
pub(crate) fn integrate_batch(
    generator: &TimeDepVectorField,
    t0: f64,
    t1: f64,
    starts: &[Vec<f64>],
    jacobian: bool,
    options: &FlowOptions,
) -> Result<Vec<Endpoint>> {
    let n = 2 * generator.space().d;
    if let Some(p) = starts.iter().find(|p| p.len() != n) {
        return Err(Error::Precondition(format!("point {p:?} must have {n} coordinates")));
    }
    let batch = Batch { generator, starts, jacobian, n };
    let states = if t0 == t1 || generator.is_zero() {
        batch.initial()
    } else if let Some(steps) = options.fixed_steps {
        batch.run(t0, t1, steps.max(1))?
    } else {
        let mut steps = options.initial_steps.max(1);
        let mut coarse = batch.run(t0, t1, steps)?;
        loop {
            steps *= 2;
            let fine = batch.run(t0, t1, steps)?;
            let estimate = coarse
                .iter()
                .zip(&fine)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                .fold(0.0f64, f64::max)
                / 15.0;
            if estimate < options.tol {
                break fine;
            }
            if steps * 2 > options.max_steps {
                let worst = coarse
                    .iter()
                    .zip(&fine)
                    .zip(starts)
                    .max_by(|((a, b), _), ((c, e), _)| {
                        let da = a.iter().zip(*b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                        let dc = c.iter().zip(*e).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                        da.total_cmp(&dc)
                    })
                    .map(|(_, s)| s.clone())
                    .unwrap_or_default();
                return Err(Error::StepFloor { start: worst, estimate });
            }
            coarse = fine;
        }
    };
    Ok(states
        .into_iter()
        .map(|mut y| {
            let jac = if jacobian { Some(y.split_off(n)) } else { None };
            Endpoint { state: y, jac }
        })
        .collect())
}

/// Time-`eps` flow of a time-dependent field, evaluated lazily.
#[derive(Debug, Clone)]
pub struct FlowMap {
    generator: TimeDepVectorField,
    eps: f64,
    safe_box: ActionBox,
    options: FlowOptions,
}

/// Wraps the angle coordinates of a `(theta, I)` point into `[0, 1)`.
pub fn wrap_point(mut p: Vec<f64>, d: usize) -> Vec<f64> {
    for a in &mut p[..d] {
        *a = wrap_unit(*a);
    }
    p
}

impl FlowMap {
    pub fn generator(&self) -> &TimeDepVectorField {
        &self.generator
    }

    pub fn space(&self) -> &TorusBox {
        self.generator.space()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn safe_box(&self) -> &ActionBox {
        &self.safe_box
    }

    pub fn options(&self) -> &FlowOptions {
        &self.options
    }

    pub fn with_options(mut self, options: FlowOptions) -> Self {
        self.options = options;
        self
    }

    pub(crate) fn endpoints(&self, points: &[Vec<f64>], inverse: bool, jacobian: bool) -> Result<Vec<Endpoint>> {
        let (t0, t1) = if inverse { (self.eps, 0.0) } else { (0.0, self.eps) };
        integrate_batch(&self.generator, t0, t1, points, jacobian, &self.options)
    }

    /// Images of `(theta, I)` points, angles wrapped into `[0, 1)`.
    pub fn apply(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let d = self.space().d;
        Ok(self.endpoints(points, false, false)?.into_iter().map(|e| wrap_point(e.state, d)).collect())
    }

    /// Images with unwrapped angles, for winding counts.
    pub fn apply_unwrapped(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        Ok(self.endpoints(points, false, false)?.into_iter().map(|e| e.state).collect())
    }

    /// Images and row-major `2d x 2d` Jacobians.
    pub fn apply_with_jacobian(&self, points: &[Vec<f64>]) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        let d = self.space().d;
        Ok(self
            .endpoints(points, false, true)?
            .into_iter()
            .map(|e| (wrap_point(e.state, d), e.jac.expect("requested")))
            .collect())
    }

    /// Preimages, by integrating the time-reversed generator.
    pub fn apply_inverse(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let d = self.space().d;
        Ok(self.endpoints(points, true, false)?.into_iter().map(|e| wrap_point(e.state, d)).collect())
    }

    /// Preimages and the Jacobians of the inverse map at the given points.
    pub fn apply_inverse_with_jacobian(&self, points: &[Vec<f64>]) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        let d = self.space().d;
        Ok(self
            .endpoints(points, true, true)?
            .into_iter()
            .map(|e| (wrap_point(e.state, d), e.jac.expect("requested")))
            .collect())
    }
}

/// The flow `phi^eps` of `x` with default options.
pub fn integrate_flow(x: &TimeDepVectorField, eps: f64, safe_box: &ActionBox) -> Result<FlowMap> {
    integrate_flow_with(x, eps, safe_box, FlowOptions::default())
}

/// [`integrate_flow`] with explicit options. Trajectories from the corners and centre of
/// `safe_box` are integrated up front so that an escaping flow fails here.
pub fn integrate_flow_with(
    x: &TimeDepVectorField,
    eps: f64,
    safe_box: &ActionBox,
    options: FlowOptions,
) -> Result<FlowMap> {
    let eps = check_time(eps, x.eps_max())?;
    if safe_box.dim() != x.space().d || !x.space().action_box().contains_box(safe_box) {
        return Err(Error::Precondition("safe box must lie inside the action box".into()));
    }
    let map = FlowMap { generator: x.clone(), eps, safe_box: safe_box.clone(), options };
    let d = x.space().d;
    let mut probes = Vec::new();
    for actions in safe_box.grid(2).into_iter().chain([safe_box.center()]) {
        for a in [0.0, 0.5] {
            let mut p = vec![a; d];
            p.extend_from_slice(&actions);
            probes.push(p);
        }
    }
    map.endpoints(&probes, false, false)?;
    Ok(map)
}

/// The canonical matrix of `omega = sum dI_j ^ dtheta_j` in `(theta, I)` coordinates.
pub fn canonical_omega(d: usize) -> Vec<f64> {
    let n = 2 * d;
    let mut o = vec![0.0; n * n];
    for j in 0..d {
        o[j * n + d + j] = -1.0;
        o[(d + j) * n + j] = 1.0;
    }
    o
}

/// `max |J^T Omega J - Omega|` for a row-major `2d x 2d` matrix.
pub fn symplectic_matrix_defect(jac: &[f64], d: usize) -> f64 {
    let n = 2 * d;
    let o = canonical_omega(d);
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let mut v = 0.0;
            for a in 0..n {
                for b in 0..n {
                    v += jac[a * n + r] * o[a * n + b] * jac[b * n + c];
                }
            }
            worst = worst.max((v - o[r * n + c]).abs());
        }
    }
    worst
}
