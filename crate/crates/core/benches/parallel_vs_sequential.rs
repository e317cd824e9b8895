use std::hint::black_box;
use std::path::Path;

use adaptive_rbf::clustering::{kmeans_with, KmeansConfig};
use adaptive_rbf::excitation::excitation_gramian_with;
use adaptive_rbf::par::Execution;
use adaptive_rbf::rbfnet::{fill_distance_with, lattice_centers, RbfNetwork};
use adaptive_rbf::scenario::{trajectory_samples, ScenarioFile};
use adaptive_rbf::simulator::run_comparison_with;
use adaptive_rbf::trajectory::TrajectorySpec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn lattice() -> RbfNetwork {
    let centers = lattice_centers(&vec![vec![-1.0, 0.0, 1.0]; 6]).unwrap();
    RbfNetwork::new(centers, 1.1, 2).unwrap()
}

fn gramian(c: &mut Criterion) {
    let spec = TrajectorySpec::default();
    let net = lattice();
    let mut g = c.benchmark_group("gramian_729_nodes");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| excitation_gramian_with(exec, black_box(&net), &spec, 0.0, 2.0 * spec.period, 0.01).unwrap())
        });
    }
    g.finish();
}

fn kmeans(c: &mut Criterion) {
    let samples = trajectory_samples(&TrajectorySpec::default(), 0.001).unwrap();
    let cfg = KmeansConfig::new(20, 7);
    let mut g = c.benchmark_group("kmeans_20_of_6284");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| kmeans_with(exec, black_box(&samples), &cfg).unwrap())
        });
    }
    g.finish();
}

fn fill(c: &mut Criterion) {
    let spec = TrajectorySpec::default();
    let inputs = spec.period_inputs(0.001).unwrap();
    let net = lattice();
    let mut g = c.benchmark_group("fill_distance_729_nodes");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| fill_distance_with(exec, black_box(&net.centers), &inputs).unwrap())
        });
    }
    g.finish();
}

fn comparison(c: &mut Criterion) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/paper_section5.json");
    let file = ScenarioFile::load(&path).unwrap();
    let mut base = file.base_scenario();
    base.duration = 20.0;
    let mut g = c.benchmark_group("four_controllers_20s");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_comparison_with(exec, black_box(&base), &file.controllers))
        });
    }
    g.finish();
}

criterion_group!(benches, gramian, kmeans, fill, comparison);
criterion_main!(benches);
