//! Benchmark fixtures shared by the criterion targets.

use std::f64::consts::TAU;

use toravg_core::field::hamiltonian_vf;
use toravg_core::flow::TimeDepVectorField;
use toravg_core::random::{random_scalar, rng, RandomFieldSpec};
use toravg_core::{ScalarField, TorusBox};

pub fn space(d: usize) -> TorusBox {
    TorusBox::cube(d, 0.5, 3.5, 8, 33).expect("valid space")
}

pub fn random_field(d: usize, seed: u64) -> ScalarField {
    random_scalar(&space(d), &mut rng(seed), &RandomFieldSpec::default())
}

/// `H = I1 + 0.1 sin(2 pi th1)` on the one-dimensional space.
pub fn closed_form_generator() -> TimeDepVectorField {
    let h = ScalarField::from_fn(&space(1), |th, i| i[0] + 0.1 * (TAU * th[0]).sin());
    TimeDepVectorField::constant(hamiltonian_vf(&h), 0.5, true).expect("symplectic generator")
}
