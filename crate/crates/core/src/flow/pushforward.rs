//! Pushforward of vector fields by flow maps, and the generator of a composition.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::family::{SampledFamily, TimeDepVectorField, DEFAULT_SAMPLES};
use super::integrate::{integrate_flow, FlowMap};
use crate::error::{Error, Result};
use crate::field::transform::angle_node;
use crate::field::{PointContext, ScalarField, VectorField};
use crate::space::{wrap_unit, TorusBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `phi_* X`
    Forward,
    /// `(phi^{-1})_* X`
    Inverse,
}

/// `(theta, I)` points of the `(2K+1)^d` angle grid times the action grid, in the sample
/// layout of [`ScalarField::from_samples`].
pub fn phase_grid(space: &TorusBox) -> Vec<Vec<f64>> {
    let m = space.modes_per_axis();
    let actions = space.action_points();
    let mut out = Vec::with_capacity(m.pow(space.d as u32) * actions.len());
    for a in 0..m.pow(space.d as u32) {
        let th = angle_node(a, space.d, m);
        for act in &actions {
            let mut p = th.clone();
            p.extend_from_slice(act);
            out.push(p);
        }
    }
    out
}

/// Evaluates `x` at a `(theta, I)` point.
pub(crate) fn eval_point(x: &VectorField, p: &[f64]) -> Result<Vec<f64>> {
    let d = x.space().d;
    let angles: Vec<f64> = p[..d].iter().map(|&a| wrap_unit(a)).collect();
    let ctx = PointContext::new(x.space(), &angles, &p[d..])?;
    Ok(x.eval_in(&ctx, false).value)
}

/// Solves `J v = b` for a row-major square `J`.
pub(crate) fn solve(jac: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let m = DMatrix::from_row_slice(n, n, jac);
    m.lu()
        .solve(&DVector::from_column_slice(b))
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Precondition("singular flow Jacobian".into()))
}

/// Builds a field on `space` from its component values at [`phase_grid`] points.
pub(crate) fn field_from_values(space: &TorusBox, values: &[Vec<f64>]) -> Result<VectorField> {
    let n = 2 * space.d;
    let m = space.modes_per_axis();
    let comps = (0..n)
        .map(|u| {
            let samples: Vec<f64> = values.iter().map(|v| v[u]).collect();
            ScalarField::from_samples(space, &samples, m)
        })
        .collect::<Result<Vec<_>>>()?;
    let (a, b) = comps.split_at(space.d);
    VectorField::new(space, a.to_vec(), b.to_vec())
}

/// `phi_* X` (or `(phi^{-1})_* X`) on the safe box of `phi`, resampled onto the spectral
/// grid. At `m` the forward pushforward is `D phi|_{phi^{-1}(m)} X(phi^{-1}(m))`, computed
/// as `J^{-1} X(phi^{-1}(m))` with `J` the Jacobian of the reversed flow.
pub fn pushforward_vf(phi: &FlowMap, x: &VectorField, direction: Direction) -> Result<VectorField> {
    let space = phi.space();
    if x.space().d != space.d || x.space().truncation != space.truncation {
        return Err(Error::SpaceMismatch);
    }
    let out = x.space().with_box(phi.safe_box());
    let points = phase_grid(&out);
    let ends = phi.endpoints(&points, direction == Direction::Forward, true)?;
    let values = ends
        .par_iter()
        .map(|e| solve(e.jac.as_ref().expect("requested"), &eval_point(x, &e.state)?))
        .collect::<Result<Vec<_>>>()?;
    field_from_values(&out, &values)
}

/// `X3_eps = X1_eps + (phi_{X1}^eps)_* X2_eps`, the generator of `phi_{X1} o phi_{X2}`,
/// on the safe box of `X1`'s space.
pub fn compose_generator(x1: &TimeDepVectorField, x2: &TimeDepVectorField) -> Result<TimeDepVectorField> {
    if x1.space() != x2.space() {
        return Err(Error::SpaceMismatch);
    }
    if x1.eps_max() != x2.eps_max() {
        return Err(Error::Precondition("generators must share eps_max".into()));
    }
    let n = x1.nodes().or(x2.nodes()).map_or(DEFAULT_SAMPLES, <[f64]>::len);
    let safe = x1.space().safe_box();
    let out = x1.space().with_box(&safe);
    let family = SampledFamily::sample(x1.eps_max(), n, |eps| {
        let base = x1.at(eps)?.resample_to(&out)?;
        let x2e = x2.at(eps)?;
        if x2e.is_zero() {
            return Ok(base);
        }
        let phi = integrate_flow(x1, eps, &safe)?;
        Ok(&base + &pushforward_vf(&phi, &x2e, Direction::Forward)?)
    })?;
    TimeDepVectorField::from_family_checked(family, x1.is_symplectic() && x2.is_symplectic())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;

    fn s1() -> TorusBox {
        TorusBox::cube(1, 0.5, 3.5, 8, 33).unwrap()
    }

    #[test]
    fn identity_pushforward() {
        let s = s1();
        let x = VectorField::new(&s, vec![ScalarField::from_fn(&s, |th, i| i[0] * (TAU * th[0]).cos())], vec![ScalarField::constant(&s, 0.2)])
            .unwrap();
        let zero = TimeDepVectorField::zero(&s, 1.0).unwrap();
        let phi = integrate_flow(&zero, 0.5, &s.safe_box()).unwrap();
        let y = pushforward_vf(&phi, &x, Direction::Forward).unwrap();
        let expect = x.resample_to(y.space()).unwrap();
        assert!((&y - &expect).sup_norm() < 1e-13);
    }

    #[test]
    fn translation_pushforward() {
        let s = s1();
        let shift = 0.3;
        let gen = TimeDepVectorField::constant(VectorField::constant_angular(&s, &[1.0]), 1.0, true).unwrap();
        let phi = integrate_flow(&gen, shift, &s.safe_box()).unwrap();
        let x = VectorField::new(&s, vec![ScalarField::zero(&s)], vec![ScalarField::from_fn(&s, |th, _| (TAU * th[0]).sin())]).unwrap();
        let y = pushforward_vf(&phi, &x, Direction::Forward).unwrap();
        let expect = ScalarField::from_fn(y.space(), move |th, _| (TAU * (th[0] - shift)).sin());
        assert!((&y.action_comp[0] - &expect).sup_norm() < 1e-10);
        assert!(y.angle_comp[0].sup_norm() < 1e-10);
        let back = pushforward_vf(&phi, &x, Direction::Inverse).unwrap();
        let expect = ScalarField::from_fn(y.space(), move |th, _| (TAU * (th[0] + shift)).sin());
        assert!((&back.action_comp[0] - &expect).sup_norm() < 1e-10);
    }

    #[test]
    fn composition_with_zero() {
        let s = s1();
        let x = VectorField::new(&s, vec![ScalarField::constant(&s, 0.5)], vec![ScalarField::from_fn(&s, |th, _| 0.1 * (TAU * th[0]).sin())]).unwrap();
        let x1 = TimeDepVectorField::constant(x, 0.5, true).unwrap();
        let zero = TimeDepVectorField::zero(&s, 0.5).unwrap();
        let safe = s.with_box(&s.safe_box());
        let a = compose_generator(&x1, &zero).unwrap();
        let b = compose_generator(&zero, &x1).unwrap();
        for eps in [0.0, 0.2, 0.5] {
            let expect = x1.at(eps).unwrap().resample_to(&safe).unwrap();
            assert!((&a.at(eps).unwrap() - &expect).sup_norm() < 1e-12);
            assert!((&b.at(eps).unwrap() - &expect).sup_norm() < 1e-12);
        }
        assert!(a.is_symplectic());
    }
}
