use std::f64::consts::TAU;

use proptest::prelude::*;
use toravg_core::field::{
    closedness_defect, d_scalar, hamiltonian_vf, lie_bracket, omega_flat, omega_sharp, weinstein_nabla,
};
use toravg_core::random::{random_one_form, random_scalar, random_vector, random_vertical_angular, rng, RandomFieldSpec};
use toravg_core::{ScalarField, TorusBox, VectorField};

fn space(d: usize) -> TorusBox {
    TorusBox::cube(d, 0.5, 1.5, 8, 33).unwrap()
}

/// `nabla_X Y` through the coordinate shortcut `sum_u X^u d_u Y^j` on angle components.
fn nabla_shortcut(x: &VectorField, y: &VectorField) -> VectorField {
    let s = x.space();
    let comps = (0..s.d)
        .map(|j| {
            let mut acc = ScalarField::zero(s);
            for u in 0..s.d {
                acc = &acc + &x.angle_comp[u].mul(&y.angle_comp[j].d_angle(u));
            }
            acc
        })
        .collect();
    VectorField::new(s, comps, vec![ScalarField::zero(s); s.d]).unwrap()
}

#[test]
fn evaluation_examples() {
    let s = space(1);
    assert_eq!(ScalarField::constant(&s, 1.0).evaluate(&[0.37], &[1.1]).unwrap(), 1.0);
    let c = ScalarField::from_fn(&s, |th, _| (TAU * th[0]).cos());
    assert!(c.evaluate(&[0.25], &[0.9]).unwrap().abs() < 1e-15);
    let sq = ScalarField::from_action_fn(&s, |i| i[0] * i[0]);
    // Off-grid point; cubic interpolation is exact on quadratics.
    let i = 0.5 + 0.3 / 32.0 + 0.123;
    assert!((sq.evaluate(&[0.8], &[i]).unwrap() - i * i).abs() < 1e-13);
    assert!(sq.evaluate(&[0.8], &[1.6]).is_err());
}

#[test]
fn pure_modes_differentiate_exactly() {
    let s = space(2);
    for (k1, k2) in [(1i64, 0i64), (3, -2), (-8, 8)] {
        let f = ScalarField::from_fn(&s, move |th, i| i[1] * (TAU * (k1 as f64 * th[0] + k2 as f64 * th[1])).sin());
        let df = d_scalar(&f);
        for (j, k) in [(0usize, k1), (1, k2)] {
            let expect = ScalarField::from_fn(&s, move |th, i| {
                TAU * k as f64 * i[1] * (TAU * (k1 as f64 * th[0] + k2 as f64 * th[1])).cos()
            });
            assert!((&df.theta_comp[j] - &expect).sup_norm() < 1e-11 * (1.0 + k.abs() as f64));
        }
    }
}

#[test]
fn nabla_matches_coordinate_shortcut() {
    let s = space(2);
    let mut r = rng(11);
    for _ in 0..5 {
        let x = random_vertical_angular(&s, &mut r, 2);
        let y = random_vertical_angular(&s, &mut r, 2);
        let got = weinstein_nabla(&x, &y).unwrap();
        assert!((&got - &nabla_shortcut(&x, &y)).sup_norm() < 1e-11);
        assert!(got.is_vertical(1e-14));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn d_squared_vanishes(seed in any::<u64>(), d in 1usize..=2) {
        let s = space(d);
        let spec = RandomFieldSpec { max_mode: 7, ..RandomFieldSpec::default() };
        let f = random_scalar(&s, &mut rng(seed), &spec);
        prop_assert!(closedness_defect(&d_scalar(&f)) < 1e-9);
    }

    #[test]
    fn musical_maps_are_inverse(seed in any::<u64>(), d in 1usize..=2) {
        let s = space(d);
        let mut r = rng(seed);
        let x = random_vector(&s, &mut r, &RandomFieldSpec::default());
        prop_assert!((&omega_sharp(&omega_flat(&x)) - &x).sup_norm() < 1e-14);
        let a = random_one_form(&s, &mut r, &RandomFieldSpec::default());
        prop_assert!((&omega_flat(&omega_sharp(&a)) - &a).sup_norm() < 1e-14);
    }

    #[test]
    fn hamiltonian_sign_convention(seed in any::<u64>(), d in 1usize..=2) {
        let s = space(d);
        let h = random_scalar(&s, &mut rng(seed), &RandomFieldSpec::default());
        prop_assert!((&omega_flat(&hamiltonian_vf(&h)) + &d_scalar(&h)).sup_norm() < 1e-12);
    }

    #[test]
    fn connection_is_torsion_free_and_flat(seed in any::<u64>()) {
        let s = space(2);
        let mut r = rng(seed);
        let x = random_vertical_angular(&s, &mut r, 2);
        let y = random_vertical_angular(&s, &mut r, 2);
        let z = random_vertical_angular(&s, &mut r, 2);
        let nabla = |a: &VectorField, b: &VectorField| weinstein_nabla(a, b).unwrap();
        let torsion = &(&nabla(&x, &y) - &nabla(&y, &x)) - &lie_bracket(&x, &y);
        prop_assert!(torsion.sup_norm() < 1e-9);
        let curvature = &(&nabla(&x, &nabla(&y, &z)) - &nabla(&y, &nabla(&x, &z))) - &nabla(&lie_bracket(&x, &y), &z);
        prop_assert!(curvature.sup_norm() < 1e-8);
    }

    #[test]
    fn json_and_binary_roundtrip(seed in any::<u64>(), d in 1usize..=2) {
        let s = TorusBox::cube(d, 0.5, 1.5, 3, 6).unwrap();
        let f = random_scalar(&s, &mut rng(seed), &RandomFieldSpec::default());
        prop_assert_eq!(ScalarField::from_json(&f.to_json()).unwrap(), f.clone());
        prop_assert_eq!(ScalarField::from_bytes(&f.to_bytes()).unwrap(), f);
    }

    #[test]
    fn evaluation_is_real_and_grid_consistent(seed in any::<u64>()) {
        let s = TorusBox::cube(1, 0.5, 1.5, 4, 9).unwrap();
        let f = random_scalar(&s, &mut rng(seed), &RandomFieldSpec::default());
        let m = s.modes_per_axis();
        let samples = f.samples(m);
        for a in 0..m {
            for p in 0..s.n_actions() {
                let v = f.evaluate(&[a as f64 / m as f64], &s.action_point(p)).unwrap();
                prop_assert!((v - samples[a * s.n_actions() + p]).abs() < 1e-12);
            }
        }
    }
}
