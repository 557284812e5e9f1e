use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use weyl_core::conditions::{hilbert_transform, HilbertMode, LineMeasure, MaximalMode, MaximalOperator};
use weyl_core::scattering::{quasi_szego_q, scattering_point};
use weyl_core::schrodinger::{dirichlet_eigenvalues, weyl_w, whole_line_eigenvalues};
use weyl_core::spectral::linspace;
use weyl_core::sumrules::fz_sum_rule_report;
use weyl_core::{Momentum, Potential, Settings, SignedMeasureNu};

fn well() -> Potential {
    Potential::square_well(2.0, 1.0, 1e-3).unwrap()
}

fn gaussian() -> Potential {
    Potential::gaussian_bump(-1.0, 3.0, 0.5, 8.0, 1e-3).unwrap()
}

fn jost(c: &mut Criterion) {
    let s = Settings::default();
    let mut g = c.benchmark_group("jost");
    for (name, v) in [("well", well()), ("gaussian", gaussian())] {
        g.bench_with_input(BenchmarkId::new("scattering_point", name), &v, |b, v| {
            b.iter(|| scattering_point(v, black_box(3.7), 0.0, &s).unwrap())
        });
        let k = Momentum::new(Complex64::new(2.0, 0.5)).unwrap();
        g.bench_with_input(BenchmarkId::new("weyl_w_complex", name), &v, |b, v| {
            b.iter(|| weyl_w(v, black_box(k), 0.0, &s).unwrap())
        });
    }
    g.finish();
}

fn eigenvalues(c: &mut Criterion) {
    let s = Settings::default();
    let deep = Potential::square_well(9.0, 5.0, 1e-3).unwrap();
    let mut g = c.benchmark_group("eigenvalues");
    g.sample_size(10);
    g.bench_function("dirichlet_deep_well", |b| b.iter(|| dirichlet_eigenvalues(&deep, &s).unwrap()));
    g.bench_function("whole_line_deep_well", |b| b.iter(|| whole_line_eigenvalues(&deep, 0.0, &s).unwrap()));
    g.finish();
}

fn integrals(c: &mut Criterion) {
    let s = Settings::default();
    let mut g = c.benchmark_group("integrals");
    g.sample_size(10);
    g.bench_function("quasi_szego_well", |b| b.iter(|| quasi_szego_q(&well(), &s).unwrap()));
    g.bench_function("sum_rule_well", |b| b.iter(|| fz_sum_rule_report(&well(), &s).unwrap()));
    g.finish();
}

fn measures(c: &mut Criterion) {
    let grid = linspace(1.0 + 1e-9, 60.0, 5901);
    let density = grid.iter().map(|k| (k * 0.7).sin() / k).collect();
    let nu = SignedMeasureNu::new(grid, density, vec![(2.5, 0.3), (17.25, -0.8)]).unwrap();
    let op = MaximalOperator::for_nu(&nu);
    let odd = LineMeasure::odd_extension(&nu);
    let mut g = c.benchmark_group("measures");
    for mode in [MaximalMode::Short, MaximalMode::Long] {
        g.bench_function(format!("maximal_{mode:?}"), |b| b.iter(|| op.eval(black_box(12.34), mode)));
    }
    g.bench_function("hilbert_full", |b| b.iter(|| hilbert_transform(&odd, black_box(12.34), HilbertMode::Full).unwrap()));
    g.finish();
}

criterion_group!(benches, jost, eigenvalues, integrals, measures);
criterion_main!(benches);
