//! Exterior derivative, the symplectic musical isomorphisms and the fiber connection.
//!
//! Convention: `omega = sum_j dI_j ^ dtheta_j`, `X_H = -omega^{-1}(dH)`.

use super::{OneForm, ScalarField, VectorField};
use crate::error::{Error, Result};

/// Verticality tolerance for inputs of [`weinstein_nabla`].
pub const VERTICAL_TOL: f64 = 1e-10;

/// `df`: spectral in the angles, 4th-order finite differences in the actions.
pub fn d_scalar(f: &ScalarField) -> OneForm {
    let d = f.space().d;
    OneForm::new(f.space(), (0..d).map(|j| f.d_angle(j)).collect(), (0..d).map(|j| f.d_action(j)).collect())
        .expect("components share the space")
}

/// `max_{u<v} sup |d_u alpha_v - d_v alpha_u|` over all `2d` coordinates.
pub fn closedness_defect(alpha: &OneForm) -> f64 {
    let n = 2 * alpha.space().d;
    let mut worst = 0.0f64;
    for u in 0..n {
        for v in u + 1..n {
            let c = &alpha.comp(v).d_coord(u) - &alpha.comp(u).d_coord(v);
            worst = worst.max(c.sup_norm());
        }
    }
    worst
}

/// `omega(X, .)`: `a d/dtheta + b d/dI` maps to `b dtheta - a dI`.
pub fn omega_flat(x: &VectorField) -> OneForm {
    OneForm::new(x.space(), x.action_comp.clone(), x.angle_comp.iter().map(|c| -c).collect())
        .expect("components share the space")
}

/// Inverse of [`omega_flat`]: `p dtheta + q dI` maps to `-q d/dtheta + p d/dI`.
pub fn omega_sharp(alpha: &OneForm) -> VectorField {
    VectorField::new(alpha.space(), alpha.action_comp.iter().map(|c| -c).collect(), alpha.theta_comp.clone())
        .expect("components share the space")
}

/// `X_H = -omega^{-1}(dH) = sum_j H_{I_j} d/dtheta_j - H_{theta_j} d/dI_j`.
pub fn hamiltonian_vf(h: &ScalarField) -> VectorField {
    -&omega_sharp(&d_scalar(h))
}

/// Lie bracket `[X, Y]^v = X^u d_u Y^v - Y^u d_u X^v`, truncated to the retained modes.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> VectorField {
    assert_eq!(x.space(), y.space(), "fields live on different phase spaces");
    let space = x.space();
    let n = 2 * space.d;
    let comps: Vec<ScalarField> = (0..n)
        .map(|v| {
            let mut acc = ScalarField::zero(space);
            for u in 0..n {
                if !x.comp(u).is_zero() {
                    acc = &acc + &x.comp(u).mul(&y.comp(v).d_coord(u));
                }
                if !y.comp(u).is_zero() {
                    acc = &acc - &y.comp(u).mul(&x.comp(v).d_coord(u));
                }
            }
            acc
        })
        .collect();
    let (a, b) = comps.split_at(space.d);
    VectorField::new(space, a.to_vec(), b.to_vec()).expect("components share the space")
}

/// Interior product `X ⌟ d beta` as a 1-form: `gamma_v = sum_u X^u (d_u beta_v - d_v beta_u)`.
fn contract_d(x: &VectorField, beta: &OneForm) -> OneForm {
    let space = x.space();
    let n = 2 * space.d;
    let comps: Vec<ScalarField> = (0..n)
        .map(|v| {
            let mut acc = ScalarField::zero(space);
            for u in 0..n {
                if u == v || x.comp(u).is_zero() {
                    continue;
                }
                let curl = &beta.comp(v).d_coord(u) - &beta.comp(u).d_coord(v);
                if !curl.is_zero() {
                    acc = &acc + &x.comp(u).mul(&curl);
                }
            }
            acc
        })
        .collect();
    let (a, b) = comps.split_at(space.d);
    OneForm::new(space, a.to_vec(), b.to_vec()).expect("components share the space")
}

/// Fiber connection `nabla_X Y = omega^{-1}(X ⌟ d(Y ⌟ omega))` for vertical `X`, `Y`.
pub fn weinstein_nabla(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    if x.space() != y.space() {
        return Err(Error::SpaceMismatch);
    }
    for (name, f) in [("X", x), ("Y", y)] {
        if !f.is_vertical(VERTICAL_TOL) {
            return Err(Error::Precondition(format!("{name} is not vertical")));
        }
    }
    Ok(omega_sharp(&contract_d(x, &omega_flat(y))))
}
