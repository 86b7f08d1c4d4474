//! Vertical average over the torus action and the invariance predicates built on it.
//!
//! In the chart the period lattice is generated by `d/dtheta_j`, whose flows are angle
//! translations with identity Jacobian, so averaging a tensor reduces to keeping the
//! `k = 0` Fourier mode of every component.

use crate::field::{omega_flat, OneForm, ScalarField, VectorField};
use crate::space::TorusBox;

/// Default tolerance of the predicates in this module.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Tensors that can be averaged along the fibers.
pub trait Averageable: Sized {
    fn vertical_average(&self) -> Self;

    /// `sup |T - <T>|` over the evaluation grid.
    fn oscillation(&self) -> f64;
}

impl Averageable for ScalarField {
    fn vertical_average(&self) -> Self {
        self.average()
    }

    fn oscillation(&self) -> f64 {
        (self - &self.average()).sup_norm()
    }
}

impl Averageable for OneForm {
    fn vertical_average(&self) -> Self {
        self.average()
    }

    fn oscillation(&self) -> f64 {
        (self - &self.average()).sup_norm()
    }
}

impl Averageable for VectorField {
    fn vertical_average(&self) -> Self {
        self.average()
    }

    fn oscillation(&self) -> f64 {
        (self - &self.average()).sup_norm()
    }
}

pub fn vertical_average<T: Averageable>(t: &T) -> T {
    t.vertical_average()
}

/// `T` is invariant under the torus action iff `<T> = T`.
pub fn is_g_invariant<T: Averageable>(t: &T, tol: f64) -> bool {
    t.oscillation() < tol
}

/// `X` is vertical and parallel iff `omega(X)` is a pull-back from the base: no
/// `dtheta` components and angle-independent `dI` components.
pub fn is_vertical_parallel(x: &VectorField, tol: f64) -> bool {
    let alpha = omega_flat(x);
    alpha.theta_comp.iter().all(|c| c.sup_norm() < tol) && alpha.action_comp.iter().all(|c| c.oscillation() < tol)
}

/// A vector field on the base, sampled on the action grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseField {
    pub space: TorusBox,
    /// `components[j][p]`: coefficient of `d/dI_j` at action grid node `p`.
    pub components: Vec<Vec<f64>>,
}

impl BaseField {
    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().fold(0.0, |a, x| a.max(x.abs()))
    }
}

/// The base field `pi_* X` when it is well defined fiberwise, i.e. when every action
/// component of `X` is angle-independent to `tol`.
pub fn is_lift(x: &VectorField, tol: f64) -> Option<BaseField> {
    if x.action_comp.iter().any(|c| c.oscillation() >= tol) {
        return None;
    }
    Some(BaseField { space: x.space().clone(), components: x.action_comp.iter().map(|c| c.average_values()).collect() })
}
