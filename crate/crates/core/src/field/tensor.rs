use std::ops::{Add, Neg, Sub};

use super::scalar::{PointContext, ScalarField};
use crate::error::{Error, Result};
use crate::space::TorusBox;

/// 1-form `sum_j theta_comp[j] dtheta_j + action_comp[j] dI_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    space: TorusBox,
    pub theta_comp: Vec<ScalarField>,
    pub action_comp: Vec<ScalarField>,
}

/// Vector field `sum_j angle_comp[j] d/dtheta_j + action_comp[j] d/dI_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    space: TorusBox,
    pub angle_comp: Vec<ScalarField>,
    pub action_comp: Vec<ScalarField>,
}

/// Value and Jacobian of a vector field at a point, coordinates ordered
/// `(theta_1..theta_d, I_1..I_d)`.
#[derive(Debug, Clone)]
pub struct VectorPointValue {
    pub value: Vec<f64>,
    /// Row-major `2d x 2d`, `jac[r * 2d + c] = d value_r / d x_c`.
    pub jac: Option<Vec<f64>>,
}

fn check_components(space: &TorusBox, a: &[ScalarField], b: &[ScalarField]) -> Result<()> {
    if a.len() != space.d || b.len() != space.d {
        return Err(Error::Precondition(format!("expected {} components of each kind", space.d)));
    }
    if a.iter().chain(b).any(|f| f.space() != space) {
        return Err(Error::SpaceMismatch);
    }
    Ok(())
}

macro_rules! componentwise {
    ($ty:ident, $first:ident, $second:ident) => {
        impl $ty {
            pub fn new(space: &TorusBox, $first: Vec<ScalarField>, $second: Vec<ScalarField>) -> Result<Self> {
                check_components(space, &$first, &$second)?;
                Ok(Self { space: space.clone(), $first, $second })
            }

            pub fn zero(space: &TorusBox) -> Self {
                let z = vec![ScalarField::zero(space); space.d];
                Self { space: space.clone(), $first: z.clone(), $second: z }
            }

            pub fn space(&self) -> &TorusBox {
                &self.space
            }

            /// Component along coordinate `u` (`0..d` angles, `d..2d` actions).
            pub fn comp(&self, u: usize) -> &ScalarField {
                let d = self.space.d;
                if u < d {
                    &self.$first[u]
                } else {
                    &self.$second[u - d]
                }
            }

            pub fn components(&self) -> impl Iterator<Item = &ScalarField> {
                self.$first.iter().chain(self.$second.iter())
            }

            pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
                Self {
                    space: self.space.clone(),
                    $first: self.$first.iter().map(&f).collect(),
                    $second: self.$second.iter().map(&f).collect(),
                }
            }

            fn zip_with(&self, other: &Self, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
                assert_eq!(self.space, other.space, "fields live on different phase spaces");
                Self {
                    space: self.space.clone(),
                    $first: self.$first.iter().zip(&other.$first).map(|(a, b)| f(a, b)).collect(),
                    $second: self.$second.iter().zip(&other.$second).map(|(a, b)| f(a, b)).collect(),
                }
            }

            pub fn scale(&self, s: f64) -> Self {
                self.map(|c| c.scale(s))
            }

            pub fn checked_add(&self, other: &Self) -> Result<Self> {
                if self.space != other.space {
                    return Err(Error::SpaceMismatch);
                }
                Ok(self + other)
            }

            /// Componentwise vertical average.
            pub fn average(&self) -> Self {
                self.map(ScalarField::average)
            }

            /// Max over components of the grid sup-norm.
            pub fn sup_norm(&self) -> f64 {
                self.components().map(ScalarField::sup_norm).fold(0.0, f64::max)
            }

            pub fn is_zero(&self) -> bool {
                self.components().all(ScalarField::is_zero)
            }

            pub fn resample_to(&self, target: &TorusBox) -> Result<Self> {
                Ok(Self {
                    space: target.clone(),
                    $first: self.$first.iter().map(|c| c.resample_to(target)).collect::<Result<_>>()?,
                    $second: self.$second.iter().map(|c| c.resample_to(target)).collect::<Result<_>>()?,
                })
            }

            /// `sum_i w_i T_i` over tensors on `space`.
            pub fn linear_combination(space: &TorusBox, terms: &[(f64, &Self)]) -> Self {
                let pick = |u: usize| -> ScalarField {
                    let parts: Vec<(f64, &ScalarField)> = terms.iter().map(|&(w, t)| (w, t.comp(u))).collect();
                    ScalarField::linear_combination(space, &parts)
                };
                let d = space.d;
                Self { space: space.clone(), $first: (0..d).map(pick).collect(), $second: (d..2 * d).map(pick).collect() }
            }

            /// Component values at a point.
            pub fn evaluate(&self, angles: &[f64], actions: &[f64]) -> Result<Vec<f64>> {
                let ctx = PointContext::new(&self.space, angles, actions)?;
                Ok(self.components().map(|c| c.eval_in(&ctx, false).value).collect())
            }
        }

        impl Add for &$ty {
            type Output = $ty;
            fn add(self, rhs: &$ty) -> $ty {
                self.zip_with(rhs, |a, b| a + b)
            }
        }

        impl Sub for &$ty {
            type Output = $ty;
            fn sub(self, rhs: &$ty) -> $ty {
                self.zip_with(rhs, |a, b| a - b)
            }
        }

        impl Neg for &$ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                self.scale(-1.0)
            }
        }
    };
}

componentwise!(OneForm, theta_comp, action_comp);
componentwise!(VectorField, angle_comp, action_comp);

impl VectorField {
    /// `sum_j c_j d/dtheta_j` with constant coefficients.
    pub fn constant_angular(space: &TorusBox, c: &[f64]) -> Self {
        let angle = c.iter().map(|&v| ScalarField::constant(space, v)).collect();
        Self { space: space.clone(), angle_comp: angle, action_comp: vec![ScalarField::zero(space); space.d] }
    }

    /// Coordinate field `d/dx_u`.
    pub fn coordinate(space: &TorusBox, u: usize) -> Self {
        let mut out = Self::zero(space);
        let one = ScalarField::constant(space, 1.0);
        if u < space.d {
            out.angle_comp[u] = one;
        } else {
            out.action_comp[u - space.d] = one;
        }
        out
    }

    /// Value and (optionally) Jacobian at a point.
    pub fn evaluate_with_jacobian(&self, angles: &[f64], actions: &[f64], jacobian: bool) -> Result<VectorPointValue> {
        let ctx = PointContext::new(&self.space, angles, actions)?;
        Ok(self.eval_in(&ctx, jacobian))
    }

    pub(crate) fn eval_in(&self, ctx: &PointContext, jacobian: bool) -> VectorPointValue {
        let n = 2 * self.space.d;
        let mut value = vec![0.0; n];
        let mut jac = if jacobian { Some(vec![0.0; n * n]) } else { None };
        self.eval_into(ctx, &mut value, jac.as_deref_mut());
        VectorPointValue { value, jac }
    }

    /// Writes the components into `value` and, if given, the row-major Jacobian into `jac`.
    pub(crate) fn eval_into(&self, ctx: &PointContext, value: &mut [f64], mut jac: Option<&mut [f64]>) {
        let d = self.space.d;
        let n = 2 * d;
        for (r, comp) in self.components().enumerate() {
            let pv = comp.eval_raw(ctx, jac.is_some());
            value[r] = pv.value;
            if let Some(j) = jac.as_deref_mut() {
                j[r * n..r * n + d].copy_from_slice(&pv.d_angle[..d]);
                j[r * n + d..(r + 1) * n].copy_from_slice(&pv.d_action[..d]);
            }
        }
    }

    /// True when all action components vanish to `tol`.
    pub fn is_vertical(&self, tol: f64) -> bool {
        self.action_comp.iter().all(|c| c.sup_norm() < tol)
    }
}

impl OneForm {
    /// Contraction `alpha(X) = sum_u alpha_u X^u`, truncated to the retained modes.
    pub fn contract(&self, x: &VectorField) -> ScalarField {
        assert_eq!(self.space(), x.space(), "fields live on different phase spaces");
        let mut acc = ScalarField::zero(self.space());
        for u in 0..2 * self.space().d {
            let (a, b) = (self.comp(u), x.comp(u));
            if !a.is_zero() && !b.is_zero() {
                acc = &acc + &a.mul(b);
            }
        }
        acc
    }
}
