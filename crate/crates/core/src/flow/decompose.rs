//! Splitting a flow `phi^eps` of a symplectic generator into a fibration-preserving
//! flow `Phi^eps`, generated by the average, after a Hamiltonian flow:
//! `phi^eps = Phi^eps o phi_Z^eps` with `Z_eps = X_{G_eps}` and `<G_eps> = 0`.

use super::family::{ScalarFamily, SampledFamily, TimeDepVectorField, DEFAULT_SAMPLES};
use super::integrate::{integrate_flow_with, FlowMap, FlowOptions};
use super::pushforward::{pushforward_vf, Direction};
use crate::decomposition::{primitive_within, CLOSED_TOL};
use crate::error::{Error, Result};
use crate::field::{hamiltonian_vf, omega_flat, ScalarField};
use crate::space::ActionBox;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposeOptions {
    /// Sample count for autonomous generators; sampled generators keep their nodes.
    pub samples: usize,
    /// Closedness and consistency tolerance of the primitive step.
    pub gate_tol: f64,
    pub flow: FlowOptions,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, gate_tol: CLOSED_TOL, flow: FlowOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct FlowDecomposition {
    lift: TimeDepVectorField,
    g: ScalarFamily,
    z: TimeDepVectorField,
    safe_box: ActionBox,
    flow: FlowOptions,
}

impl FlowDecomposition {
    /// `eps -> <X_eps>`, the generator of `Phi^eps`.
    pub fn lift(&self) -> &TimeDepVectorField {
        &self.lift
    }

    /// `eps -> G_eps`, on the safe box.
    pub fn g(&self) -> &ScalarFamily {
        &self.g
    }

    pub fn g_at(&self, eps: f64) -> Result<ScalarField> {
        self.g.at(eps)
    }

    /// `eps -> X_{G_eps}`, on the safe box.
    pub fn z(&self) -> &TimeDepVectorField {
        &self.z
    }

    pub fn safe_box(&self) -> &ActionBox {
        &self.safe_box
    }

    /// `Phi^eps`.
    pub fn fiber_flow(&self, eps: f64) -> Result<FlowMap> {
        integrate_flow_with(&self.lift, eps, &self.safe_box, self.flow)
    }

    /// `phi_Z^eps`, defined on the safe box shrunk once more.
    pub fn hamiltonian_flow(&self, eps: f64) -> Result<FlowMap> {
        integrate_flow_with(&self.z, eps, &self.z.space().safe_box(), self.flow)
    }
}

pub fn decompose_flow(x: &TimeDepVectorField, safe_box: &ActionBox) -> Result<FlowDecomposition> {
    decompose_flow_with(x, safe_box, &DecomposeOptions::default())
}

pub fn decompose_flow_with(
    x: &TimeDepVectorField,
    safe_box: &ActionBox,
    options: &DecomposeOptions,
) -> Result<FlowDecomposition> {
    let defect = x.symplectic_defect();
    if defect >= options.gate_tol {
        return Err(Error::NotSymplectic { defect, tol: options.gate_tol });
    }
    let lift = x.vertical_average();
    let out = x.space().with_box(safe_box);
    let n = x.nodes().map_or(options.samples, <[f64]>::len);
    let g = SampledFamily::sample(x.eps_max(), n, |eps| {
        let xe = x.at(eps)?;
        let w = &xe - &xe.average();
        if w.is_zero() {
            return Ok(ScalarField::zero(&out));
        }
        let phi = integrate_flow_with(&lift, eps, safe_box, options.flow)?;
        let z = pushforward_vf(&phi, &w, Direction::Inverse)?;
        Ok(-&primitive_within(&omega_flat(&z), options.gate_tol)?)
    })?;
    let z = TimeDepVectorField::from_family_checked(g.map(hamiltonian_vf), true)?;
    Ok(FlowDecomposition { lift, g, z, safe_box: safe_box.clone(), flow: options.flow })
}
