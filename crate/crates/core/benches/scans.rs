//! Sequential against data-parallel execution of the main scans.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use reach_smooth::kernels::{find_support_radius_with, DerivOrder, Domain1D, PiecewiseQuadratic};
use reach_smooth::manifold::{make_shape, sample_count, ShapeSpec};
use reach_smooth::par::Execution;
use reach_smooth::reach::{default_min_sep, estimate_reach_federer_with};
use reach_smooth::smoothing::build_net_with;
use reach_smooth::verify::lipschitz_of_with;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn reach_scan(c: &mut Criterion) {
    let curve = make_shape(&ShapeSpec::stadium(1.0, 2.0)).unwrap();
    let mut group = c.benchmark_group("reach_scan");
    group.sample_size(10);
    for n in [500usize, 2000] {
        let sample = sample_count(&curve, n);
        let sep = default_min_sep(&sample);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &sample, |b, s| {
                b.iter(|| estimate_reach_federer_with(exec, black_box(s), sep).unwrap())
            });
        }
    }
    group.finish();
}

fn net(c: &mut Criterion) {
    let curve = make_shape(&ShapeSpec::cad_default()).unwrap();
    let mut group = c.benchmark_group("net");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| build_net_with(exec, &curve, black_box(0.01), 0.16).unwrap()));
    }
    group.finish();
}

fn support_radius(c: &mut Criterion) {
    let g = PiecewiseQuadratic::with_linear_derivative(
        vec![-1.0, -0.4, 0.0, 0.3, 1.0],
        &[0.2, -0.5, 0.7, 0.1, 0.3],
        0.0,
    )
    .unwrap();
    let dom = Domain1D::symmetric(0.5).unwrap();
    let mut group = c.benchmark_group("support_radius");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| find_support_radius_with(exec, &g, &dom, black_box(1e-6), DerivOrder::First).unwrap())
        });
    }
    group.finish();
}

fn lipschitz_grid(c: &mut Criterion) {
    let dom = Domain1D::symmetric(1.0).unwrap();
    let mut group = c.benchmark_group("lipschitz_grid");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| lipschitz_of_with(exec, |x: f64| (3.0 * x).sin() * x.exp(), &dom, black_box(100_000)))
        });
    }
    group.finish();
}

criterion_group!(benches, reach_scan, net, support_radius, lipschitz_grid);
criterion_main!(benches);
