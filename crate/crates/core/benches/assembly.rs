use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lbexp::assembly::{assemble_with, DEFAULT_V0};
use lbexp::eigensolve::{eigendecompose_with, mode_masses};
use lbexp::geometry::{default_resolution, enumerate_basis, quadrature};
use lbexp::region::{builtin_domain, CatalogOptions};
use lbexp::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    group.sample_size(10);
    for (name, n) in [("l_shape", 400), ("octant_with_hole", 400), ("torus_asymmetric_holes", 400)] {
        let d = builtin_domain(name, &CatalogOptions::default()).unwrap();
        let spec = enumerate_basis(&d.geometry, n).unwrap();
        let grid = quadrature(&d.geometry, default_resolution(&spec)).unwrap();
        for (label, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(label, name), &exec, |b, &exec| {
                b.iter(|| assemble_with(&spec, &d.region, DEFAULT_V0, &grid, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn solve_and_masses(c: &mut Criterion) {
    let d = builtin_domain("desymmetrized_sinai", &CatalogOptions::default()).unwrap();
    let spec = enumerate_basis(&d.geometry, 600).unwrap();
    let grid = quadrature(&d.geometry, default_resolution(&spec)).unwrap();
    let h = assemble_with(&spec, &d.region, DEFAULT_V0, &grid, Execution::Sequential).unwrap();
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for (label, exec) in MODES {
        group.bench_function(BenchmarkId::new("eigendecompose", label), |b| {
            b.iter(|| eigendecompose_with(&h, 120, exec).unwrap())
        });
        let sol = eigendecompose_with(&h, 120, exec).unwrap();
        group.bench_function(BenchmarkId::new("mode_masses", label), |b| {
            b.iter(|| mode_masses(&sol, &grid, &d.region, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, assembly, solve_and_masses);
criterion_main!(benches);
