//! Symplectic potentials, action functions `xi(b) = int_{gamma(b)} lambda` and checks on
//! the period lattice they generate.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::averaging::is_vertical_parallel;
use crate::error::{Error, Result};
use crate::field::{closedness_defect, d_scalar, hamiltonian_vf, OneForm, ScalarField, VectorField};
use crate::flow::{integrate_flow_with, FlowOptions, TimeDepVectorField};
use crate::space::{wrap_signed, TorusBox};

/// Tolerance on `d lambda = omega`.
pub const POTENTIAL_TOL: f64 = 1e-10;
/// Distance from an integer beyond which a winding count is rejected.
pub const WINDING_GUARD: f64 = 0.1;
/// Tolerance of the vertical-parallel precondition.
pub const PARALLEL_TOL: f64 = 1e-10;

const CYCLE_TOL: f64 = 1e-12;

/// A 1-form `lambda` with `d lambda = omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticPotential {
    form: OneForm,
}

fn canonical_form(space: &TorusBox) -> OneForm {
    let d = space.d;
    OneForm::new(
        space,
        (0..d).map(|j| ScalarField::from_action_fn(space, |i| i[j])).collect(),
        vec![ScalarField::zero(space); d],
    )
    .expect("components share the space")
}

impl SymplecticPotential {
    /// `lambda = sum_j I_j dtheta_j`.
    pub fn canonical(space: &TorusBox) -> Self {
        Self { form: canonical_form(space) }
    }

    /// `sum_j I_j dtheta_j + dg + sum_j c_j dtheta_j`.
    pub fn shifted(g: &ScalarField, c: &[f64]) -> Result<Self> {
        let space = g.space();
        if c.len() != space.d {
            return Err(Error::Precondition(format!("expected {} constant shifts", space.d)));
        }
        let shift = OneForm::new(
            space,
            c.iter().map(|&v| ScalarField::constant(space, v)).collect(),
            vec![ScalarField::zero(space); space.d],
        )?;
        Self::from_form(&(&(&canonical_form(space) + &d_scalar(g)) + &shift))
    }

    /// Accepts any form differing from the canonical potential by a closed form.
    pub fn from_form(form: &OneForm) -> Result<Self> {
        let defect = closedness_defect(&(form - &canonical_form(form.space())));
        if defect >= POTENTIAL_TOL {
            return Err(Error::Precondition(format!("d lambda differs from omega by {defect:.3e}")));
        }
        Ok(Self { form: form.clone() })
    }

    pub fn form(&self) -> &OneForm {
        &self.form
    }

    pub fn space(&self) -> &TorusBox {
        self.form.space()
    }
}

/// Monotone reparametrization `s` of `[0, 1]` with its derivative.
#[derive(Clone)]
pub struct Reparametrization {
    s: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ds: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Reparametrization {
    pub fn new(s: impl Fn(f64) -> f64 + Send + Sync + 'static, ds: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { s: Arc::new(s), ds: Arc::new(ds) }
    }

    pub fn identity() -> Self {
        Self::new(|t| t, |_| 1.0)
    }

    /// `s(t) = t + a sin(2 pi t) / (2 pi)`, monotone for `|a| < 1`.
    pub fn sine(a: f64) -> Self {
        Self::new(move |t| t + a * (TAU * t).sin() / TAU, move |t| 1.0 + a * (TAU * t).cos())
    }
}

impl std::fmt::Debug for Reparametrization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Reparametrization")
    }
}

/// Loops `t -> (theta_j = offset_j + s(t), other angles at their offsets, I = b)`.
#[derive(Debug, Clone)]
pub struct CycleFamily {
    index: usize,
    offsets: Vec<f64>,
    speed: Reparametrization,
}

impl CycleFamily {
    pub fn coordinate(index: usize, offsets: Vec<f64>) -> Self {
        Self { index, offsets, speed: Reparametrization::identity() }
    }

    pub fn with_speed(mut self, speed: Reparametrization) -> Self {
        self.speed = speed;
        self
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// `(theta, I)` at loop parameter `t`.
    pub fn point(&self, b: &[f64], t: f64) -> Vec<f64> {
        let mut p = self.offsets.clone();
        p[self.index] += (self.speed.s)(t);
        p.extend_from_slice(b);
        p
    }

    fn validate(&self, space: &TorusBox) -> Result<()> {
        let d = space.d;
        if self.index >= d || self.offsets.len() != d {
            return Err(Error::InvalidCycle(format!("cycle index {} and {} offsets in dimension {d}", self.index, self.offsets.len())));
        }
        let b = space.action_box().center();
        let (p0, p1) = (self.point(&b, 0.0), self.point(&b, 1.0));
        let gap = (0..d).map(|j| wrap_signed(p1[j] - p0[j]).abs()).fold(0.0, f64::max);
        if gap > CYCLE_TOL {
            return Err(Error::InvalidCycle(format!("loop does not close (gap {gap:.3e})")));
        }
        let drift = (d..2 * d).map(|j| (p1[j] - b[j - d]).abs().max((p0[j] - b[j - d]).abs())).fold(0.0, f64::max);
        if drift > CYCLE_TOL {
            return Err(Error::InvalidCycle(format!("loop leaves its fiber (drift {drift:.3e})")));
        }
        Ok(())
    }
}

/// `xi(b) = int_0^1 lambda_j(gamma(b, t)) s'(t) dt` on every action grid node, by the
/// trapezoid rule on `4K + 1` points.
pub fn action_function(lambda: &SymplecticPotential, gamma: &CycleFamily) -> Result<ScalarField> {
    let space = lambda.space();
    gamma.validate(space)?;
    let m = 4 * space.truncation + 1;
    let comp = &lambda.form.theta_comp[gamma.index];
    let d = space.d;
    let mut values = Vec::with_capacity(space.n_actions());
    for b in space.action_points() {
        let mut acc = 0.0;
        for i in 0..m {
            let t = i as f64 / m as f64;
            let p = gamma.point(&b, t);
            acc += comp.evaluate(&p[..d], &p[d..])? * (gamma.speed.ds)(t);
        }
        values.push(acc / m as f64);
    }
    ScalarField::from_action_values(space, &values)
}

/// `X_{xi o pi}` for an angle-independent `xi`.
pub fn lattice_section(xi: &ScalarField) -> Result<VectorField> {
    if !xi.is_angle_independent(PARALLEL_TOL) {
        return Err(Error::Precondition("action function must be angle-independent".into()));
    }
    Ok(hamiltonian_vf(&xi.average()))
}

fn time_one_endpoints(x: &VectorField, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if !is_vertical_parallel(x, PARALLEL_TOL) {
        return Err(Error::Precondition("field must be vertical and parallel".into()));
    }
    let generator = TimeDepVectorField::constant(x.clone(), 1.0, false)?;
    let flow = integrate_flow_with(&generator, 1.0, &x.space().action_box(), FlowOptions::default())?;
    flow.apply_unwrapped(points)
}

/// Largest distance between a sample `(theta, I)` point and its time-1 image, measured
/// on the torus in the angles.
pub fn verify_one_periodic(x: &VectorField, sample_points: &[Vec<f64>]) -> Result<f64> {
    let d = x.space().d;
    let ends = time_one_endpoints(x, sample_points)?;
    Ok(sample_points
        .iter()
        .zip(&ends)
        .map(|(p, q)| {
            let a: f64 = (0..d).map(|j| wrap_signed(q[j] - p[j]).powi(2)).sum();
            let b: f64 = (d..2 * d).map(|j| (q[j] - p[j]).powi(2)).sum();
            (a + b).sqrt()
        })
        .fold(0.0, f64::max))
}

/// Winding numbers of the time-1 trajectory of `x` from `start` in each angle.
pub fn winding_numbers(x: &VectorField, start: &[f64]) -> Result<Vec<i64>> {
    let d = x.space().d;
    let end = time_one_endpoints(x, &[start.to_vec()])?.remove(0);
    (0..d)
        .map(|j| {
            let w = end[j] - start[j];
            if (w - w.round()).abs() > WINDING_GUARD {
                return Err(Error::NonIntegralWinding { value: w });
            }
            Ok(w.round() as i64)
        })
        .collect()
}

/// `det [X_j^{theta_k}(b)]` over `d` vertical sections.
pub fn independence_determinant(sections: &[VectorField], b: &[f64]) -> Result<f64> {
    let d = b.len();
    if sections.len() != d {
        return Err(Error::Precondition(format!("expected {d} sections")));
    }
    let angles = vec![0.0; d];
    let mut m = DMatrix::zeros(d, d);
    for (j, x) in sections.iter().enumerate() {
        let v = x.evaluate(&angles, b)?;
        for k in 0..d {
            m[(k, j)] = v[k];
        }
    }
    Ok(m.determinant())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s1() -> TorusBox {
        TorusBox::cube(1, 0.5, 2.0, 8, 33).unwrap()
    }

    #[test]
    fn canonical_action_is_the_action() {
        let s = s1();
        let xi = action_function(&SymplecticPotential::canonical(&s), &CycleFamily::coordinate(0, vec![0.0])).unwrap();
        assert!((&xi - &ScalarField::from_action_fn(&s, |i| i[0])).sup_norm() < 1e-13);
    }

    #[test]
    fn exact_shift_and_speed_do_not_change_the_action() {
        let s = s1();
        let g = ScalarField::from_fn(&s, |th, i| i[0] * (TAU * th[0]).sin() + 0.2 * (2.0 * TAU * th[0]).cos());
        let lam = SymplecticPotential::shifted(&g, &[0.0]).unwrap();
        let gamma = CycleFamily::coordinate(0, vec![0.3]).with_speed(Reparametrization::sine(0.4));
        let xi = action_function(&lam, &gamma).unwrap();
        assert!((&xi - &ScalarField::from_action_fn(&s, |i| i[0])).sup_norm() < 1e-10);
    }

    #[test]
    fn open_loop_is_rejected() {
        let s = s1();
        let gamma = CycleFamily::coordinate(0, vec![0.0]).with_speed(Reparametrization::new(|t| 0.5 * t, |_| 0.5));
        let err = action_function(&SymplecticPotential::canonical(&s), &gamma).unwrap_err();
        assert!(matches!(err, Error::InvalidCycle(_)));
    }

    #[test]
    fn non_potential_is_rejected() {
        let s = s1();
        let f = OneForm::new(&s, vec![ScalarField::from_action_fn(&s, |i| 2.0 * i[0])], vec![ScalarField::zero(&s)]).unwrap();
        assert!(SymplecticPotential::from_form(&f).is_err());
    }

    #[test]
    fn lattice_sections_of_simple_actions() {
        let s = s1();
        let x = lattice_section(&ScalarField::from_action_fn(&s, |i| i[0])).unwrap();
        assert!((&x - &VectorField::coordinate(&s, 0)).sup_norm() < 1e-12);
        assert!(lattice_section(&ScalarField::constant(&s, 3.0)).unwrap().sup_norm() < 1e-15);
        let sq = lattice_section(&ScalarField::from_action_fn(&s, |i| i[0] * i[0])).unwrap();
        let expect = VectorField::new(&s, vec![ScalarField::from_action_fn(&s, |i| 2.0 * i[0])], vec![ScalarField::zero(&s)]).unwrap();
        assert!((&sq - &expect).sup_norm() < 1e-10);
        assert!(is_vertical_parallel(&sq, 1e-10));
        let bad = ScalarField::from_fn(&s, |th, _| (TAU * th[0]).sin());
        assert!(lattice_section(&bad).is_err());
    }

    #[test]
    fn periodicity_defects() {
        let s = s1();
        let pts = vec![vec![0.1, 0.7], vec![0.9, 1.6]];
        for (c, expect) in [(1.0, 0.0), (2.0, 0.0), (0.5, 0.5)] {
            let x = VectorField::constant_angular(&s, &[c]);
            let defect = verify_one_periodic(&x, &pts).unwrap();
            assert!((defect - expect).abs() < 1e-9, "c = {c}: {defect}");
        }
        assert_eq!(winding_numbers(&VectorField::constant_angular(&s, &[2.0]), &pts[0]).unwrap(), vec![2]);
        let err = winding_numbers(&VectorField::constant_angular(&s, &[0.5]), &pts[0]).unwrap_err();
        assert!(matches!(err, Error::NonIntegralWinding { .. }));
    }

    #[test]
    fn coordinate_sections_are_independent() {
        let s = TorusBox::cube(2, 0.5, 2.0, 4, 17).unwrap();
        let lam = SymplecticPotential::canonical(&s);
        let sections: Vec<VectorField> = (0..2)
            .map(|j| lattice_section(&action_function(&lam, &CycleFamily::coordinate(j, vec![0.0, 0.0])).unwrap()).unwrap())
            .collect();
        let det = independence_determinant(&sections, &[1.0, 1.2]).unwrap();
        assert!((det - 1.0).abs() < 1e-10);
        assert_eq!(winding_numbers(&sections[1], &[0.2, 0.3, 1.0, 1.2]).unwrap(), vec![0, 1]);
    }
}
