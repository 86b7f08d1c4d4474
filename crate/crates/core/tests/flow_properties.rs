use std::f64::consts::TAU;

use proptest::prelude::*;
use toravg_core::averaging::vertical_average;
use toravg_core::field::hamiltonian_vf;
use toravg_core::flow::{
    compose_generator, decompose_flow, integrate_flow, pushforward_vf, symplectic_matrix_defect, Direction,
    TimeDepVectorField,
};
use toravg_core::random::{random_scalar, random_vector, rng, RandomFieldSpec};
use toravg_core::space::wrap_signed;
use toravg_core::verify::point_distance;
use toravg_core::{ScalarField, TorusBox, VectorField};

fn space1() -> TorusBox {
    TorusBox::cube(1, 0.5, 3.5, 8, 33).unwrap()
}

fn closed_form_generator(s: &TorusBox, c: f64, a: f64) -> TimeDepVectorField {
    let h = ScalarField::from_fn(s, move |th, i| c * i[0] + a * (TAU * th[0]).sin());
    TimeDepVectorField::constant(hamiltonian_vf(&h), 0.5, true).unwrap()
}

#[test]
fn flow_at_time_zero_is_the_identity() {
    let s = space1();
    let flow = integrate_flow(&closed_form_generator(&s, 1.0, 0.1), 0.0, &s.safe_box()).unwrap();
    let p = vec![vec![0.3, 1.7]];
    let (q, jac) = flow.apply_with_jacobian(&p).unwrap().remove(0);
    assert!(point_distance(&q, &p[0], 1) < 1e-12);
    assert!(jac.iter().zip([1.0, 0.0, 0.0, 1.0]).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn pushforward_agrees_with_finite_difference_jacobian() {
    let s = space1();
    let gen = closed_form_generator(&s, 1.0, 0.1);
    let flow = integrate_flow(&gen, 0.4, &s.safe_box()).unwrap();
    let x = VectorField::new(
        &s,
        vec![ScalarField::from_fn(&s, |th, i| 0.1 * i[0] + 0.05 * (TAU * th[0]).cos())],
        vec![ScalarField::from_fn(&s, |th, i| 0.02 * i[0] * (TAU * th[0]).sin())],
    )
    .unwrap();
    let pushed = pushforward_vf(&flow, &x, Direction::Forward).unwrap();
    let h = 1e-4;
    for m in [vec![0.1, 1.5], vec![0.6, 2.2], vec![0.95, 2.9]] {
        let q = flow.apply_inverse(std::slice::from_ref(&m)).unwrap().remove(0);
        let mut probes = Vec::new();
        for c in 0..2 {
            for sgn in [1.0, -1.0] {
                let mut p = q.clone();
                p[c] += sgn * h;
                probes.push(p);
            }
        }
        let img = flow.apply_unwrapped(&probes).unwrap();
        let xq = x.evaluate(&q[..1], &q[1..]).unwrap();
        let mut fd = [0.0; 2];
        for (row, v) in fd.iter_mut().enumerate() {
            for c in 0..2 {
                let dcol = (img[2 * c][row] - img[2 * c + 1][row]) / (2.0 * h);
                *v += dcol * xq[c];
            }
        }
        let got = pushed.evaluate(&m[..1], &m[1..]).unwrap();
        assert!((got[0] - fd[0]).abs() < 1e-5 && (got[1] - fd[1]).abs() < 1e-5, "{got:?} vs {fd:?}");
    }
}

#[test]
fn composition_with_zero_generators() {
    let s = space1();
    let x1 = closed_form_generator(&s, 1.0, 0.1);
    let zero = TimeDepVectorField::zero(&s, 0.5).unwrap();
    let safe = s.with_box(&s.safe_box());
    for (a, b) in [(&x1, &zero), (&zero, &x1)] {
        let x3 = compose_generator(a, b).unwrap();
        for eps in [0.0, 0.3, 0.5] {
            let expect = x1.at(eps).unwrap().resample_to(&safe).unwrap();
            assert!((&x3.at(eps).unwrap() - &expect).sup_norm() < 1e-7);
        }
    }
}

#[test]
fn closed_form_flow_decomposition() {
    let s = space1();
    let (c, a) = (1.0, 0.1);
    let dec = decompose_flow(&closed_form_generator(&s, c, a), &s.safe_box()).unwrap();
    let safe = s.with_box(&s.safe_box());
    assert!((&dec.lift().at(0.2).unwrap() - &VectorField::constant_angular(&s, &[c])).sup_norm() < 1e-12);
    for eps in [0.1, 0.25, 0.5] {
        let expect = ScalarField::from_fn(&safe, move |th, _| a * (TAU * (th[0] + c * eps)).sin());
        assert!((&dec.g_at(eps).unwrap() - &expect).sup_norm() < 1e-6);
        assert!(dec.g_at(eps).unwrap().average().sup_norm() == 0.0);
    }
}

#[test]
fn symplectic_lift_has_no_hamiltonian_part() {
    let s = space1();
    let x = VectorField::new(&s, vec![ScalarField::zero(&s)], vec![ScalarField::constant(&s, 0.3)]).unwrap();
    let gen = TimeDepVectorField::constant(x.clone(), 0.5, true).unwrap();
    let dec = decompose_flow(&gen, &s.safe_box()).unwrap();
    assert!(dec.g().values().iter().all(ScalarField::is_zero));
    assert!((&dec.lift().at(0.4).unwrap() - &x).sup_norm() < 1e-15);
}

/// Fiber-preserving symplectic generator: `X_{b I^2 / 2} + m d/dI`.
fn shear_lift(s: &TorusBox, b: f64, m: f64) -> VectorField {
    let x = hamiltonian_vf(&ScalarField::from_action_fn(s, move |i| 0.5 * b * i[0] * i[0]));
    &x + &VectorField::new(s, vec![ScalarField::zero(s)], vec![ScalarField::constant(s, m)]).unwrap()
}

#[test]
fn fiber_preserving_flows_fix_the_period_lattice() {
    let s = space1();
    let gen = TimeDepVectorField::constant(shear_lift(&s, 0.3, 0.2), 0.5, true).unwrap();
    let flow = integrate_flow(&gen, 0.5, &s.safe_box()).unwrap();
    let e = VectorField::coordinate(&s, 0);
    let pushed = pushforward_vf(&flow, &e, Direction::Forward).unwrap();
    let safe = s.with_box(&s.safe_box());
    assert!((&pushed - &VectorField::coordinate(&safe, 0)).sup_norm() < 1e-7);
}

#[test]
fn redecomposing_the_lift_is_trivial() {
    let s = space1();
    let dec = decompose_flow(&closed_form_generator(&s, 1.0, 0.1), &s.safe_box()).unwrap();
    let again = decompose_flow(dec.lift(), &s.safe_box()).unwrap();
    assert!(again.g().values().iter().all(|g| g.sup_norm() < 1e-7));
    assert!((&again.lift().at(0.3).unwrap() - &dec.lift().at(0.3).unwrap()).sup_norm() < 1e-7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn lift_flows_commute_with_averaging(seed in any::<u64>()) {
        let s = TorusBox::cube(1, 0.5, 3.5, 8, 65).unwrap();
        let gen = TimeDepVectorField::constant(shear_lift(&s, 0.1, 0.2), 0.5, true).unwrap();
        let flow = integrate_flow(&gen, 0.5, &s.safe_box()).unwrap();
        let spec = RandomFieldSpec { amplitude: 0.1, ..RandomFieldSpec::default() };
        let t = random_vector(&s, &mut rng(seed), &spec);
        let lhs = vertical_average(&pushforward_vf(&flow, &t, Direction::Forward).unwrap());
        let rhs = pushforward_vf(&flow, &vertical_average(&t), Direction::Forward).unwrap();
        prop_assert!((&lhs - &rhs).sup_norm() < 1e-6);
    }

    #[test]
    fn symplectic_generators_have_symplectic_jacobians(seed in any::<u64>(), d in 1usize..=2) {
        let s = TorusBox::cube(d, 0.5, 3.5, 8, 33).unwrap();
        let mut r = rng(seed);
        let spec = RandomFieldSpec { amplitude: 0.002, ..RandomFieldSpec::default() };
        let drift = ScalarField::from_action_fn(&s, |i| i.iter().map(|v| v + 0.1 * v * v).sum());
        let h = &random_scalar(&s, &mut r, &spec) + &drift;
        let gen = TimeDepVectorField::constant(hamiltonian_vf(&h), 0.5, true).unwrap();
        let flow = integrate_flow(&gen, 0.5, &s.safe_box()).unwrap();
        let pts: Vec<Vec<f64>> = (0..5)
            .map(|i| {
                let mut p = vec![0.2 * i as f64; d];
                p.extend(vec![1.0 + 0.3 * i as f64; d]);
                p
            })
            .collect();
        for (_, jac) in flow.apply_with_jacobian(&pts).unwrap() {
            prop_assert!(symplectic_matrix_defect(&jac, d) < 1e-7);
        }
    }

    #[test]
    fn composed_generator_flows_compose(seed in any::<u64>()) {
        let s = space1();
        let x1 = closed_form_generator(&s, 1.0, 0.1);
        let mut r = rng(seed);
        let h2 = random_scalar(&s, &mut r, &RandomFieldSpec { amplitude: 0.005, max_mode: 1, degree: 2, n_terms: 2 });
        let x2 = TimeDepVectorField::constant(hamiltonian_vf(&h2), 0.5, true).unwrap();
        let x3 = compose_generator(&x1, &x2).unwrap();
        let inner = x3.space().safe_box();
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![0.1 * i as f64, inner.lo[0] + 0.1 * i as f64 * (inner.hi[0] - inner.lo[0])]).collect();
        let eps = 0.5;
        let direct = integrate_flow(&x3, eps, &inner).unwrap().apply(&pts).unwrap();
        let mid = integrate_flow(&x2, eps, &s.safe_box()).unwrap().apply(&pts).unwrap();
        let composed = integrate_flow(&x1, eps, &s.safe_box()).unwrap().apply(&mid).unwrap();
        for (p, q) in direct.iter().zip(&composed) {
            prop_assert!(wrap_signed(p[0] - q[0]).abs() < 1e-6 && (p[1] - q[1]).abs() < 1e-6);
        }
    }
}
