use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use super::transform::{analyze, angle_node, synthesize};
use crate::error::{Error, Result};
use crate::space::TorusBox;
use crate::stencil::{fd_axis, InterpStencil, MAX_DIM};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Relative magnitude below which a whole mode is dropped after a transform.
const PRUNE_REL: f64 = 1e-13;

/// One stored Fourier mode: multi-index `k` and its coefficient over the action grid.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mode {
    pub index: usize,
    pub k: [i64; MAX_DIM],
    pub data: Vec<Complex64>,
}

/// Real scalar field on `T^d x B`: a truncated Fourier series in the angles whose
/// coefficients are functions of the actions sampled on the grid.
///
/// Only modes with non-zero coefficient arrays are stored. Conjugate symmetry
/// `c[-k] = conj(c[k])` holds for every constructed value.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    space: TorusBox,
    modes: Vec<Mode>,
}

/// Per-point data shared by all components evaluated at the same point.
pub(crate) struct PointContext {
    stencil: InterpStencil,
    /// `phase[j * (2K+1) + k + K] = exp(2 pi i k theta_j)`.
    phase: Vec<Complex64>,
    truncation: usize,
}

impl PointContext {
    pub fn new(space: &TorusBox, angles: &[f64], actions: &[f64]) -> Result<Self> {
        if angles.len() != space.d || actions.len() != space.d {
            return Err(Error::Precondition(format!("point must have {} angles and actions", space.d)));
        }
        space.check_actions(actions)?;
        let kk = space.truncation;
        let width = 2 * kk + 1;
        let mut phase = vec![Complex64::new(1.0, 0.0); space.d * width];
        for (j, &th) in angles.iter().enumerate() {
            let z = Complex64::from_polar(1.0, TAU * th);
            let row = &mut phase[j * width..(j + 1) * width];
            for k in 1..=kk {
                row[kk + k] = row[kk + k - 1] * z;
                row[kk - k] = row[kk + k].conj();
            }
        }
        Ok(Self { stencil: InterpStencil::new(space, actions), phase, truncation: kk })
    }

    fn phase_of(&self, k: &[i64; MAX_DIM], d: usize) -> Complex64 {
        let width = 2 * self.truncation + 1;
        let mut z = self.phase[(k[0] + self.truncation as i64) as usize];
        for j in 1..d {
            z *= self.phase[j * width + (k[j] + self.truncation as i64) as usize];
        }
        z
    }
}

/// Allocation-free point value used on hot paths.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct RawPointValue {
    pub value: f64,
    pub d_angle: [f64; MAX_DIM],
    pub d_action: [f64; MAX_DIM],
}

/// Value and gradient of a scalar field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointValue {
    pub value: f64,
    pub d_angle: Vec<f64>,
    pub d_action: Vec<f64>,
}

impl ScalarField {
    pub fn zero(space: &TorusBox) -> Self {
        Self { space: space.clone(), modes: Vec::new() }
    }

    pub fn constant(space: &TorusBox, c: f64) -> Self {
        Self::from_action_fn(space, |_| c)
    }

    /// Angle-independent field `g(I)`.
    pub fn from_action_fn(space: &TorusBox, g: impl Fn(&[f64]) -> f64) -> Self {
        let data = space.action_points().iter().map(|p| Complex64::new(g(p), 0.0)).collect();
        Self::from_mode_map(space, BTreeMap::from([(space.zero_mode(), data)]))
    }

    /// Angle-independent field from its values on the action grid.
    pub fn from_action_values(space: &TorusBox, values: &[f64]) -> Result<Self> {
        if values.len() != space.n_actions() {
            return Err(Error::Format(format!("expected {} action values, got {}", space.n_actions(), values.len())));
        }
        let data = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Ok(Self::from_mode_map(space, BTreeMap::from([(space.zero_mode(), data)])))
    }

    /// Builds a field from `(k, coefficient array)` pairs. Missing partners `-k` are
    /// filled in so that the result is real; given pairs are symmetrized.
    pub fn from_modes<I>(space: &TorusBox, modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, Vec<Complex64>)>,
    {
        let mut map: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
        for (k, data) in modes {
            let m = space
                .mode_index(&k)
                .ok_or_else(|| Error::Format(format!("mode {k:?} outside truncation {}", space.truncation)))?;
            if data.len() != space.n_actions() {
                return Err(Error::Format(format!("coefficient array for {k:?} has length {}", data.len())));
            }
            let slot = map.entry(m).or_insert_with(|| vec![ZERO; space.n_actions()]);
            for (s, v) in slot.iter_mut().zip(data) {
                *s += v;
            }
        }
        let mut sym: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
        for (&m, data) in &map {
            let n = space.neg_mode(m);
            let partner = map.get(&n);
            let out: Vec<Complex64> = match partner {
                Some(q) => data.iter().zip(q).map(|(a, b)| 0.5 * (a + b.conj())).collect(),
                None if m == n => data.iter().map(|a| Complex64::new(a.re, 0.0)).collect(),
                None => data.iter().map(|a| 0.5 * a).collect(),
            };
            if partner.is_none() && m != n {
                sym.insert(n, out.iter().map(|c| c.conj()).collect());
            }
            sym.insert(m, out);
        }
        Ok(Self::from_mode_map(space, sym))
    }

    pub(crate) fn from_mode_map(space: &TorusBox, map: BTreeMap<usize, Vec<Complex64>>) -> Self {
        let modes = map
            .into_iter()
            .filter(|(_, data)| data.iter().any(|c| *c != ZERO))
            .map(|(index, data)| {
                let kv = space.mode_of(index);
                let mut k = [0i64; MAX_DIM];
                k[..space.d].copy_from_slice(&kv);
                Mode { index, k, data }
            })
            .collect();
        Self { space: space.clone(), modes }
    }

    /// Projects real samples on an `m`-point angle grid per axis (`m >= 2K+1`) onto the
    /// retained modes. Layout: `samples[a * n_actions + p]`, angle index `a` with axis 0
    /// slowest.
    pub fn from_samples(space: &TorusBox, samples: &[f64], m: usize) -> Result<Self> {
        let npts = space.n_actions();
        if m < space.modes_per_axis() || samples.len() != m.pow(space.d as u32) * npts {
            return Err(Error::Format("sample grid does not match the space".into()));
        }
        let dense = analyze(samples, space.d, space.truncation, m, npts);
        Ok(Self::from_dense(space, dense))
    }

    /// Samples `f(angles, actions)` on the `2K+1` angle grid and projects.
    pub fn from_fn(space: &TorusBox, f: impl Fn(&[f64], &[f64]) -> f64 + Sync) -> Self {
        let m = space.modes_per_axis();
        let samples = sample_grid(space, m, |th, act| f(th, act));
        Self::from_samples(space, &samples, m).expect("sample grid matches by construction")
    }

    fn from_dense(space: &TorusBox, dense: Vec<Complex64>) -> Self {
        let npts = space.n_actions();
        let scale = dense.iter().fold(0.0f64, |a, c| a.max(c.norm()));
        let cut = PRUNE_REL * scale;
        let mut map = BTreeMap::new();
        for (m, chunk) in dense.chunks(npts).enumerate() {
            if chunk.iter().any(|c| c.norm() > cut) {
                map.insert(m, chunk.to_vec());
            }
        }
        // Analysis of real data is conjugate-symmetric up to rounding; make it exact.
        let mut sym = BTreeMap::new();
        for (&m, data) in &map {
            let n = space.neg_mode(m);
            let out: Vec<Complex64> = match map.get(&n) {
                Some(q) => data.iter().zip(q).map(|(a, b)| 0.5 * (a + b.conj())).collect(),
                None => continue,
            };
            sym.insert(m, out);
        }
        Self::from_mode_map(space, sym)
    }

    pub fn space(&self) -> &TorusBox {
        &self.space
    }

    /// Coefficient array of mode `k`, if stored.
    pub fn mode(&self, k: &[i64]) -> Option<&[Complex64]> {
        let m = self.space.mode_index(k)?;
        self.mode_by_index(m)
    }

    pub(crate) fn mode_by_index(&self, m: usize) -> Option<&[Complex64]> {
        self.modes.binary_search_by_key(&m, |md| md.index).ok().map(|i| self.modes[i].data.as_slice())
    }

    /// Stored `(k, coefficient array)` pairs in mode order.
    pub fn modes(&self) -> impl Iterator<Item = (Vec<i64>, &[Complex64])> {
        let d = self.space.d;
        self.modes.iter().map(move |md| (md.k[..d].to_vec(), md.data.as_slice()))
    }

    pub fn n_stored_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    pub(crate) fn dense(&self) -> Vec<Complex64> {
        let npts = self.space.n_actions();
        let mut out = vec![ZERO; self.space.n_modes() * npts];
        for md in &self.modes {
            out[md.index * npts..(md.index + 1) * npts].copy_from_slice(&md.data);
        }
        out
    }

    /// Real samples on the `m`-point angle grid per axis, layout as in [`Self::from_samples`].
    pub fn samples(&self, m: usize) -> Vec<f64> {
        let npts = self.space.n_actions();
        if self.modes.is_empty() {
            return vec![0.0; m.pow(self.space.d as u32) * npts];
        }
        let zero = self.space.zero_mode();
        let half: Vec<&Mode> = self.modes.iter().filter(|md| md.index >= zero).collect();
        if 2 * half.len() > self.space.modes_per_axis() {
            return synthesize(&self.dense(), self.space.d, self.space.truncation, m, npts);
        }
        // Few modes: sum the half spectrum directly.
        let d = self.space.d;
        let cells = m.pow(d as u32);
        let mut out = vec![0.0; cells * npts];
        for md in half {
            let w = if md.index == zero { 1.0 } else { 2.0 };
            for a in 0..cells {
                let th = angle_node(a, d, m);
                let arg: f64 = (0..d).map(|j| md.k[j] as f64 * th[j]).sum();
                let ph = Complex64::from_polar(w, TAU * arg);
                for (o, c) in out[a * npts..(a + 1) * npts].iter_mut().zip(&md.data) {
                    *o += c.re * ph.re - c.im * ph.im;
                }
            }
        }
        out
    }

    /// Max of `|f|` over the `2K+1` angle grid times the action grid.
    pub fn sup_norm(&self) -> f64 {
        if self.modes.is_empty() {
            return 0.0;
        }
        self.samples(self.space.modes_per_axis()).iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// `sum_k c_k(I) e^{2 pi i k.theta}` with cubic interpolation of `c_k` in the actions.
    pub fn evaluate(&self, angles: &[f64], actions: &[f64]) -> Result<f64> {
        let ctx = PointContext::new(&self.space, angles, actions)?;
        Ok(self.eval_in(&ctx, false).value)
    }

    pub fn evaluate_with_gradient(&self, angles: &[f64], actions: &[f64]) -> Result<PointValue> {
        let ctx = PointContext::new(&self.space, angles, actions)?;
        Ok(self.eval_in(&ctx, true))
    }

    pub(crate) fn eval_in(&self, ctx: &PointContext, gradient: bool) -> PointValue {
        let d = self.space.d;
        let raw = self.eval_raw(ctx, gradient);
        let (d_angle, d_action) =
            if gradient { (raw.d_angle[..d].to_vec(), raw.d_action[..d].to_vec()) } else { (Vec::new(), Vec::new()) };
        PointValue { value: raw.value, d_angle, d_action }
    }

    pub(crate) fn eval_raw(&self, ctx: &PointContext, gradient: bool) -> RawPointValue {
        let d = self.space.d;
        let zero = self.space.zero_mode();
        let mut out = RawPointValue::default();
        let start = self.modes.partition_point(|md| md.index < zero);
        for md in &self.modes[start..] {
            let weight = if md.index == zero { 1.0 } else { 2.0 };
            let ph = ctx.phase_of(&md.k, d);
            let c = ctx.stencil.apply(&md.data) * ph;
            out.value += weight * c.re;
            if gradient {
                for j in 0..d {
                    // d/dtheta_j multiplies by 2 pi i k_j.
                    out.d_angle[j] += weight * (-TAU * md.k[j] as f64 * c.im);
                    out.d_action[j] += weight * (ctx.stencil.apply_deriv(&md.data, j) * ph).re;
                }
            }
        }
        out
    }

    /// Exact spectral derivative in `theta_j`.
    pub fn d_angle(&self, j: usize) -> ScalarField {
        let modes = self
            .modes
            .iter()
            .filter(|md| md.k[j] != 0)
            .map(|md| {
                let f = Complex64::new(0.0, TAU * md.k[j] as f64);
                Mode { index: md.index, k: md.k, data: md.data.iter().map(|c| c * f).collect() }
            })
            .collect();
        Self { space: self.space.clone(), modes }
    }

    /// 4th-order finite-difference derivative in `I_j`.
    pub fn d_action(&self, j: usize) -> ScalarField {
        let map = self.modes.iter().map(|md| (md.index, fd_axis(&md.data, &self.space, j))).collect();
        Self::from_mode_map(&self.space, map)
    }

    /// Derivative along coordinate `u`: `0..d` are angles, `d..2d` are actions.
    pub fn d_coord(&self, u: usize) -> ScalarField {
        if u < self.space.d {
            self.d_angle(u)
        } else {
            self.d_action(u - self.space.d)
        }
    }

    /// Vertical average: the `k = 0` mode.
    pub fn average(&self) -> ScalarField {
        let zero = self.space.zero_mode();
        let modes = self.modes.iter().filter(|md| md.index == zero).cloned().collect();
        Self { space: self.space.clone(), modes }
    }

    /// Grid values of the `k = 0` coefficient.
    pub fn average_values(&self) -> Vec<f64> {
        match self.mode_by_index(self.space.zero_mode()) {
            Some(data) => data.iter().map(|c| c.re).collect(),
            None => vec![0.0; self.space.n_actions()],
        }
    }

    /// Largest coefficient magnitude among non-zero modes.
    pub fn oscillation_bound(&self) -> f64 {
        let zero = self.space.zero_mode();
        self.modes
            .iter()
            .filter(|md| md.index != zero)
            .flat_map(|md| md.data.iter())
            .fold(0.0, |a, c| a.max(c.norm()))
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        let map = self.modes.iter().map(|md| (md.index, md.data.iter().map(|c| c * s).collect())).collect();
        Self::from_mode_map(&self.space, map)
    }

    fn combine(&self, other: &ScalarField, sign: f64) -> ScalarField {
        assert_eq!(self.space, other.space, "fields live on different phase spaces");
        let mut map: BTreeMap<usize, Vec<Complex64>> =
            self.modes.iter().map(|md| (md.index, md.data.clone())).collect();
        for md in &other.modes {
            let slot = map.entry(md.index).or_insert_with(|| vec![ZERO; md.data.len()]);
            for (s, v) in slot.iter_mut().zip(&md.data) {
                *s += sign * v;
            }
        }
        Self::from_mode_map(&self.space, map)
    }

    pub fn checked_add(&self, other: &ScalarField) -> Result<ScalarField> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.combine(other, 1.0))
    }

    /// Pointwise product, truncated to the retained modes.
    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        assert_eq!(self.space, other.space, "fields live on different phase spaces");
        let s = &self.space;
        let d = s.d;
        let kk = s.truncation as i64;
        let mut pairs: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (ia, a) in self.modes.iter().enumerate() {
            for (ib, b) in other.modes.iter().enumerate() {
                let k: Vec<i64> = (0..d).map(|j| a.k[j] + b.k[j]).collect();
                if k.iter().all(|x| x.abs() <= kk) {
                    pairs.entry(s.mode_index(&k).unwrap()).or_default().push((ia, ib));
                }
            }
        }
        let npts = s.n_actions();
        let map = pairs
            .into_par_iter()
            .map(|(m, list)| {
                let mut out = vec![ZERO; npts];
                for (ia, ib) in list {
                    let (x, y) = (&self.modes[ia].data, &other.modes[ib].data);
                    for p in 0..npts {
                        out[p] += x[p] * y[p];
                    }
                }
                (m, out)
            })
            .collect::<BTreeMap<_, _>>();
        Self::from_mode_map(s, map)
    }

    /// `sum_i w_i f_i` over fields on `space`.
    pub fn linear_combination(space: &TorusBox, terms: &[(f64, &ScalarField)]) -> ScalarField {
        let mut map: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
        for &(w, f) in terms {
            assert_eq!(&f.space, space, "fields live on different phase spaces");
            if w == 0.0 {
                continue;
            }
            for md in &f.modes {
                let slot = map.entry(md.index).or_insert_with(|| vec![ZERO; md.data.len()]);
                for (s, v) in slot.iter_mut().zip(&md.data) {
                    *s += w * v;
                }
            }
        }
        Self::from_mode_map(space, map)
    }

    /// Applies `f` to every stored mode; `None` drops the mode. `f` must respect
    /// conjugate symmetry (map `c[-k]` to the conjugate of the image of `c[k]`).
    pub(crate) fn map_modes(&self, f: impl Fn(&[i64], &[Complex64]) -> Option<Vec<Complex64>>) -> ScalarField {
        let d = self.space.d;
        let map = self.modes.iter().filter_map(|md| f(&md.k[..d], &md.data).map(|data| (md.index, data))).collect();
        Self::from_mode_map(&self.space, map)
    }

    /// Keeps the modes for which `keep(k)` holds.
    pub fn restrict_modes(&self, keep: impl Fn(&[i64]) -> bool) -> ScalarField {
        self.map_modes(|k, data| keep(k).then(|| data.to_vec()))
    }

    pub fn is_angle_independent(&self, tol: f64) -> bool {
        self.oscillation_bound() < tol
    }

    /// Resamples the coefficient arrays onto the action grid of `target`, whose box must
    /// lie inside this field's box. Exact for coefficients cubic in the actions.
    pub fn resample_to(&self, target: &TorusBox) -> Result<ScalarField> {
        if target.d != self.space.d || target.truncation != self.space.truncation {
            return Err(Error::SpaceMismatch);
        }
        if !self.space.action_box().contains_box(&target.action_box()) {
            return Err(Error::OutOfDomain { actions: target.action_hi.clone() });
        }
        let stencils: Vec<InterpStencil> =
            target.action_points().iter().map(|p| InterpStencil::new(&self.space, p)).collect();
        let map = self
            .modes
            .iter()
            .map(|md| (md.index, stencils.iter().map(|st| st.apply(&md.data)).collect()))
            .collect();
        Ok(Self::from_mode_map(target, map))
    }
}

/// Evaluates `f` on the `m`-point angle grid per axis times the action grid of `space`.
pub(crate) fn sample_grid(space: &TorusBox, m: usize, f: impl Fn(&[f64], &[f64]) -> f64 + Sync) -> Vec<f64> {
    let npts = space.n_actions();
    let actions = space.action_points();
    let n_angles = m.pow(space.d as u32);
    let mut out = vec![0.0; n_angles * npts];
    out.par_chunks_mut(npts).enumerate().for_each(|(a, chunk)| {
        let th = angle_node(a, space.d, m);
        for (v, act) in chunk.iter_mut().zip(&actions) {
            *v = f(&th, act);
        }
    });
    out
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.combine(rhs, -1.0)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scale(rhs)
    }
}
