//! Seeded random fields for property checks.
//!
//! Coefficient functions are polynomials of total degree at most 3 in the actions, the
//! class on which the finite-difference and interpolation stencils are exact, times a
//! few low Fourier modes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{hamiltonian_vf, OneForm, ScalarField, VectorField};
use crate::space::TorusBox;

/// Name of the generator recorded alongside seeds.
pub const RNG_NAME: &str = "ChaCha8Rng";

pub type FieldRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FieldRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomFieldSpec {
    /// Largest `|k_j|` used.
    pub max_mode: usize,
    /// Total polynomial degree in the actions.
    pub degree: usize,
    /// Number of oscillating modes (before adding conjugate partners).
    pub n_terms: usize,
    pub amplitude: f64,
}

impl Default for RandomFieldSpec {
    fn default() -> Self {
        Self { max_mode: 2, degree: 3, n_terms: 3, amplitude: 1.0 }
    }
}

impl RandomFieldSpec {
    pub fn angles_only(max_mode: usize) -> Self {
        Self { max_mode, degree: 0, ..Self::default() }
    }
}

fn monomials(d: usize, degree: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|e: Vec<u32>| {
                let used: u32 = e.iter().sum();
                (0..=(degree as u32 - used.min(degree as u32))).map(move |p| {
                    let mut e = e.clone();
                    e.push(p);
                    e
                })
            })
            .collect();
    }
    out
}

/// Random complex polynomial in the scaled actions, sampled on the grid.
fn random_poly(space: &TorusBox, rng: &mut FieldRng, degree: usize, amplitude: f64) -> Vec<Complex64> {
    let terms: Vec<(Vec<u32>, Complex64)> = monomials(space.d, degree)
        .into_iter()
        .map(|e| (e, amplitude * Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
        .collect();
    space
        .action_points()
        .iter()
        .map(|p| {
            let x: Vec<f64> = (0..space.d)
                .map(|j| {
                    let c = 0.5 * (space.action_lo[j] + space.action_hi[j]);
                    let h = 0.5 * (space.action_hi[j] - space.action_lo[j]);
                    (p[j] - c) / h
                })
                .collect();
            terms.iter().map(|(e, a)| a * e.iter().zip(&x).map(|(&p, &v)| v.powi(p as i32)).product::<f64>()).sum()
        })
        .collect()
}

fn random_k(space: &TorusBox, rng: &mut FieldRng, max_mode: usize) -> Vec<i64> {
    let kmax = max_mode.min(space.truncation) as i64;
    loop {
        let k: Vec<i64> = (0..space.d).map(|_| rng.random_range(-kmax..=kmax)).collect();
        if k.iter().any(|&x| x != 0) || kmax == 0 {
            return k;
        }
    }
}

/// Real field with a random angle-independent part and `n_terms` oscillating modes.
pub fn random_scalar(space: &TorusBox, rng: &mut FieldRng, spec: &RandomFieldSpec) -> ScalarField {
    let mut modes = vec![(vec![0; space.d], random_poly(space, rng, spec.degree, spec.amplitude))];
    for _ in 0..spec.n_terms {
        modes.push((random_k(space, rng, spec.max_mode), random_poly(space, rng, spec.degree, spec.amplitude)));
    }
    ScalarField::from_modes(space, modes).expect("modes lie inside the truncation")
}

/// Random field with zero vertical average.
pub fn random_oscillating(space: &TorusBox, rng: &mut FieldRng, spec: &RandomFieldSpec) -> ScalarField {
    let f = random_scalar(space, rng, spec);
    &f - &f.average()
}

pub fn random_one_form(space: &TorusBox, rng: &mut FieldRng, spec: &RandomFieldSpec) -> OneForm {
    let a = (0..space.d).map(|_| random_scalar(space, rng, spec)).collect();
    let b = (0..space.d).map(|_| random_scalar(space, rng, spec)).collect();
    OneForm::new(space, a, b).expect("components share the space")
}

pub fn random_vector(space: &TorusBox, rng: &mut FieldRng, spec: &RandomFieldSpec) -> VectorField {
    let a = (0..space.d).map(|_| random_scalar(space, rng, spec)).collect();
    let b = (0..space.d).map(|_| random_scalar(space, rng, spec)).collect();
    VectorField::new(space, a, b).expect("components share the space")
}

/// Vertical field whose angle components depend on the angles only.
pub fn random_vertical_angular(space: &TorusBox, rng: &mut FieldRng, max_mode: usize) -> VectorField {
    let spec = RandomFieldSpec::angles_only(max_mode);
    let a = (0..space.d).map(|_| random_scalar(space, rng, &spec)).collect();
    VectorField::new(space, a, vec![ScalarField::zero(space); space.d]).expect("components share the space")
}

/// Closed 1-form with zero vertical average: `df` for oscillating `f`.
pub fn random_exact_zero_average(space: &TorusBox, rng: &mut FieldRng, spec: &RandomFieldSpec) -> OneForm {
    crate::field::d_scalar(&random_oscillating(space, rng, spec))
}

/// Angle-independent polynomial `g(I)` of degree `spec.degree`.
pub fn random_base_function(space: &TorusBox, rng: &mut FieldRng, spec: &RandomFieldSpec) -> ScalarField {
    let data = random_poly(space, rng, spec.degree, spec.amplitude);
    ScalarField::from_modes(space, [(vec![0; space.d], data)]).expect("zero mode is inside the truncation")
}

/// The parts of a random symplectic field.
#[derive(Debug, Clone)]
pub struct SymplecticSample {
    pub field: VectorField,
    pub hamiltonian: ScalarField,
    /// Constant coefficients `m_j` of `omega^{-1}(dtheta_j) = d/dI_j`.
    pub harmonic: Vec<f64>,
    /// `g` in the vertical lift `X_g = sum_j dg/dI_j d/dtheta_j` of the base gradient.
    pub gradient_potential: ScalarField,
}

/// `X_H + sum_j m_j d/dI_j + X_g` with random `H`, `m` and base function `g`.
pub fn random_symplectic(space: &TorusBox, rng: &mut FieldRng, spec: &RandomFieldSpec) -> SymplecticSample {
    let h = random_scalar(space, rng, spec);
    let harmonic: Vec<f64> = (0..space.d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let g = random_base_function(space, rng, spec);
    let mut x = hamiltonian_vf(&h);
    for (j, &m) in harmonic.iter().enumerate() {
        x.action_comp[j] = &x.action_comp[j] + &ScalarField::constant(space, m);
    }
    let x = &x + &hamiltonian_vf(&g);
    SymplecticSample { field: x, hamiltonian: h, harmonic, gradient_potential: g }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{closedness_defect, omega_flat};

    #[test]
    fn monomial_count() {
        assert_eq!(monomials(1, 3).len(), 4);
        assert_eq!(monomials(2, 3).len(), 10);
        assert_eq!(monomials(2, 0).len(), 1);
    }

    #[test]
    fn seeded_fields_are_reproducible() {
        let s = TorusBox::cube(2, 0.5, 1.5, 4, 9).unwrap();
        let spec = RandomFieldSpec::default();
        let a = random_scalar(&s, &mut rng(7), &spec);
        let b = random_scalar(&s, &mut rng(7), &spec);
        assert_eq!(a, b);
        assert_ne!(a, random_scalar(&s, &mut rng(8), &spec));
    }

    #[test]
    fn random_symplectic_fields_are_symplectic() {
        let s = TorusBox::cube(2, 0.5, 1.5, 4, 9).unwrap();
        for seed in 0..5 {
            let x = random_symplectic(&s, &mut rng(seed), &RandomFieldSpec::default()).field;
            assert!(closedness_defect(&omega_flat(&x)) < 1e-9);
        }
    }
}
