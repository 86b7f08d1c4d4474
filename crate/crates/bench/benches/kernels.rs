use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use toravg_bench::{closed_form_generator, random_field, space};
use toravg_core::decomposition::decompose_symplectic;
use toravg_core::field::{d_scalar, hamiltonian_vf};
use toravg_core::flow::{decompose_flow, integrate_flow, pushforward_vf, Direction};
use toravg_core::VectorField;

fn spectral(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectral");
    for d in [1usize, 2] {
        let f = random_field(d, 1);
        let m = space(d).modes_per_axis();
        g.bench_with_input(BenchmarkId::new("samples", d), &f, |b, f| b.iter(|| f.samples(m)));
        g.bench_with_input(BenchmarkId::new("d_scalar", d), &f, |b, f| b.iter(|| d_scalar(f)));
        let x = hamiltonian_vf(&f);
        g.bench_with_input(BenchmarkId::new("decompose_symplectic", d), &x, |b, x| {
            b.iter(|| decompose_symplectic(x).unwrap())
        });
    }
    g.finish();
}

fn flows(c: &mut Criterion) {
    let mut g = c.benchmark_group("flow");
    g.sample_size(10);
    let s = space(1);
    let gen = closed_form_generator();
    let flow = integrate_flow(&gen, 0.5, &s.safe_box()).unwrap();
    let points: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64 / 64.0, 1.0 + i as f64 / 32.0]).collect();
    g.bench_function("apply_with_jacobian_64", |b| b.iter(|| flow.apply_with_jacobian(&points).unwrap()));
    let x = VectorField::coordinate(&s, 0);
    g.bench_function("pushforward", |b| b.iter(|| pushforward_vf(&flow, &x, Direction::Forward).unwrap()));
    g.bench_function("decompose_flow", |b| b.iter(|| decompose_flow(&gen, &s.safe_box()).unwrap()));
    g.finish();
}

criterion_group!(benches, spectral, flows);
criterion_main!(benches);
