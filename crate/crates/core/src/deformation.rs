//! Regular deformations `H_eps = J_eps o phi^eps` of a completely integrable `H_0` and
//! their Hamiltonian normal form `H_eps = I_eps o phi_{X_{G_eps}}^eps`.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::flow::{
    decompose_flow_with, integrate_flow_with, phase_grid, DecomposeOptions, FlowDecomposition, FlowMap, ScalarFamily,
    SampledFamily, TimeDepVectorField, DEFAULT_SAMPLES,
};
use crate::space::{ActionBox, TorusBox};

/// Angle-independence tolerance for the base family `J`.
pub const BASE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DeformationScenario {
    space: TorusBox,
    j: ScalarFamily,
    generator: TimeDepVectorField,
    safe_box: ActionBox,
    options: DecomposeOptions,
}

impl DeformationScenario {
    pub fn new(j: ScalarFamily, generator: TimeDepVectorField, safe_box: ActionBox) -> Result<Self> {
        let space = generator.space().clone();
        if !generator.is_symplectic() {
            return Err(Error::Precondition("deformation generator must be flagged symplectic".into()));
        }
        if (j.eps_max() - generator.eps_max()).abs() > 1e-15 {
            return Err(Error::Precondition("J and the generator must share eps_max".into()));
        }
        if let Some(nodes) = generator.nodes() {
            if nodes != j.nodes() {
                return Err(Error::Precondition("J must be sampled at the generator's nodes".into()));
            }
        }
        for f in j.values() {
            if f.space() != &space {
                return Err(Error::SpaceMismatch);
            }
            if !f.is_angle_independent(BASE_TOL) {
                return Err(Error::Precondition("J must be constant on the fibers".into()));
            }
        }
        if !space.action_box().contains_box(&safe_box) {
            return Err(Error::Precondition("safe box must lie inside the action box".into()));
        }
        Ok(Self { space, j, generator, safe_box, options: DecomposeOptions::default() })
    }

    /// `J_eps = J(eps)` sampled at the generator's nodes (or the default count).
    pub fn from_base_fn(
        generator: TimeDepVectorField,
        safe_box: ActionBox,
        j: impl Fn(f64) -> Result<ScalarField> + Sync,
    ) -> Result<Self> {
        let n = generator.nodes().map_or(DEFAULT_SAMPLES, <[f64]>::len);
        let family = SampledFamily::sample(generator.eps_max(), n, j)?;
        Self::new(family, generator, safe_box)
    }

    /// `J_eps = H_0` for all `eps`.
    pub fn with_fixed_base(h0: &ScalarField, generator: TimeDepVectorField, safe_box: ActionBox) -> Result<Self> {
        let h0 = h0.clone();
        Self::from_base_fn(generator, safe_box, move |_| Ok(h0.clone()))
    }

    pub fn with_options(mut self, options: DecomposeOptions) -> Self {
        self.options = options;
        self
    }

    pub fn space(&self) -> &TorusBox {
        &self.space
    }

    pub fn base_family(&self) -> &ScalarFamily {
        &self.j
    }

    pub fn generator(&self) -> &TimeDepVectorField {
        &self.generator
    }

    pub fn safe_box(&self) -> &ActionBox {
        &self.safe_box
    }

    pub fn eps_max(&self) -> f64 {
        self.generator.eps_max()
    }

    pub fn h0(&self) -> Result<ScalarField> {
        self.j.at(0.0)
    }

    fn flow(&self, eps: f64) -> Result<FlowMap> {
        integrate_flow_with(&self.generator, eps, &self.safe_box, self.options.flow)
    }
}

/// `f o phi` sampled on the spectral grid of `target`.
fn compose_on(f: &ScalarField, phi: &FlowMap, target: &TorusBox) -> Result<ScalarField> {
    let d = target.d;
    let images = phi.apply(&phase_grid(target))?;
    let values = images.iter().map(|q| f.evaluate(&q[..d], &q[d..])).collect::<Result<Vec<_>>>()?;
    ScalarField::from_samples(target, &values, target.modes_per_axis())
}

/// `H_eps = J_eps o phi^eps` on the safe box.
pub fn realize_deformation(s: &DeformationScenario, eps: f64) -> Result<ScalarField> {
    let j = s.j.at(eps)?;
    compose_on(&j, &s.flow(eps)?, &s.space.with_box(&s.safe_box))
}

#[derive(Debug, Clone)]
pub struct NormalForm {
    pub eps: f64,
    /// `I_eps = J_eps o Phi^eps`, on the safe box.
    pub i_nf: ScalarField,
    /// `G_eps`, on the safe box, with zero vertical average.
    pub g: ScalarField,
    pub decomposition: FlowDecomposition,
}

impl NormalForm {
    /// Largest non-constant Fourier coefficient of `I_eps`.
    pub fn angle_dependence(&self) -> f64 {
        (&self.i_nf - &self.i_nf.average()).sup_norm()
    }

    /// `phi_{X_G}^eps`, on the inner box.
    pub fn hamiltonian_flow(&self) -> Result<FlowMap> {
        self.decomposition.hamiltonian_flow(self.eps)
    }

    pub fn inner_box(&self) -> ActionBox {
        self.decomposition.z().space().safe_box()
    }
}

pub fn normal_form(s: &DeformationScenario, eps: f64) -> Result<NormalForm> {
    let decomposition = decompose_flow_with(&s.generator, &s.safe_box, &s.options)?;
    normal_form_from(s, decomposition, eps)
}

/// [`normal_form`] reusing a decomposition of the scenario's generator.
pub fn normal_form_from(s: &DeformationScenario, decomposition: FlowDecomposition, eps: f64) -> Result<NormalForm> {
    let j = s.j.at(eps)?;
    let fiber = decomposition.fiber_flow(eps)?;
    let i_nf = compose_on(&j, &fiber, &s.space.with_box(&s.safe_box))?;
    let g = decomposition.g_at(eps)?;
    Ok(NormalForm { eps, i_nf, g, decomposition })
}

/// `sup |J_eps(phi^eps(p)) - I_eps(phi_{X_G}^eps(p))|` over the spectral grid of the
/// inner box.
pub fn normal_form_residual(s: &DeformationScenario, nf: &NormalForm) -> Result<f64> {
    let inner = s.space.with_box(&nf.inner_box());
    let points = phase_grid(&inner);
    let d = s.space.d;
    let j = s.j.at(nf.eps)?;
    let lhs = s.flow(nf.eps)?.apply(&points)?;
    let rhs = nf.hamiltonian_flow()?.apply(&points)?;
    let mut worst = 0.0f64;
    for (a, b) in lhs.iter().zip(&rhs) {
        let h = j.evaluate(&a[..d], &a[d..])?;
        let n = nf.i_nf.evaluate(&b[..d], &b[d..])?;
        worst = worst.max((h - n).abs());
    }
    Ok(worst)
}
