//! Primitives of closed 1-forms with zero vertical average, and the splitting of a
//! symplectic vector field into a Hamiltonian field with zero-average Hamiltonian
//! plus its vertical average.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::averaging::Averageable;
use crate::error::{Error, Result};
use crate::field::{closedness_defect, d_scalar, omega_flat, OneForm, ScalarField, VectorField};

/// Closedness gate and equality tolerance of this module.
pub const CLOSED_TOL: f64 = 1e-8;

/// `P_j = oint alpha` along `theta_j -> theta_j + t` at `base` with all angles zero.
///
/// Every period is also evaluated over the full grid of base points and angle offsets;
/// a spread beyond `CLOSED_TOL` means `alpha` is not closed and is reported as
/// [`Error::InconsistentPeriods`].
pub fn cycle_periods(alpha: &OneForm, base: &[f64]) -> Result<Vec<f64>> {
    cycle_periods_within(alpha, base, CLOSED_TOL)
}

pub fn cycle_periods_within(alpha: &OneForm, base: &[f64], tol: f64) -> Result<Vec<f64>> {
    let space = alpha.space();
    let zeros = vec![0.0; space.d];
    let mut reference = Vec::with_capacity(space.d);
    let mut deviation = 0.0f64;
    for j in 0..space.d {
        // Integrating over theta_j keeps the modes with k_j = 0.
        let p = alpha.theta_comp[j].restrict_modes(|k| k[j] == 0);
        let r = p.evaluate(&zeros, base)?;
        let spread = p.samples(space.modes_per_axis()).iter().fold(0.0f64, |a, v| a.max((v - r).abs()));
        deviation = deviation.max(spread);
        reference.push(r);
    }
    if deviation > tol {
        return Err(Error::InconsistentPeriods { reference, deviation });
    }
    Ok(reference)
}

/// `f` with `df = alpha` and `<f> = 0`, for closed `alpha` with zero vertical average.
pub fn primitive_with_zero_average(alpha: &OneForm) -> Result<ScalarField> {
    primitive_within(alpha, CLOSED_TOL)
}

/// [`primitive_with_zero_average`] with a custom gate and consistency tolerance.
pub fn primitive_within(alpha: &OneForm, tol: f64) -> Result<ScalarField> {
    let defect = closedness_defect(alpha);
    if defect >= tol {
        return Err(Error::NotClosed { defect, tol });
    }
    let norm = alpha.vertical_average().sup_norm();
    if norm >= tol {
        return Err(Error::NonzeroAverage { norm, tol });
    }
    let space = alpha.space();
    let pivot = |k: &[i64]| (0..k.len()).max_by_key(|&j| (k[j].abs(), std::cmp::Reverse(j))).unwrap();
    let mut f = ScalarField::zero(space);
    for j in 0..space.d {
        let part = alpha.theta_comp[j].map_modes(|k, data| {
            if k.iter().all(|&x| x == 0) || pivot(k) != j {
                return None;
            }
            let div = Complex64::new(0.0, TAU * k[j] as f64);
            Some(data.iter().map(|c| c / div).collect())
        });
        f = &f + &part;
    }
    let defect = (&d_scalar(&f) - alpha).sup_norm();
    if defect >= tol {
        return Err(Error::Inconsistent { defect, tol });
    }
    Ok(f)
}

/// `X = X_A + X2` with `X2 = <X>` and `<A> = 0`. Returns `(A, X2)`.
pub fn decompose_symplectic(x: &VectorField) -> Result<(ScalarField, VectorField)> {
    decompose_symplectic_within(x, CLOSED_TOL)
}

pub fn decompose_symplectic_within(x: &VectorField, tol: f64) -> Result<(ScalarField, VectorField)> {
    let alpha = omega_flat(x);
    let defect = closedness_defect(&alpha);
    if defect >= tol {
        return Err(Error::NotSymplectic { defect, tol });
    }
    let oscillating = &alpha - &alpha.vertical_average();
    let a = -&primitive_within(&oscillating, tol)?;
    Ok((a, x.vertical_average()))
}
