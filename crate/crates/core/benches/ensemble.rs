use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use starkcool::dynamics::{derive_seeds, ensemble_run, OpenSystem, SolverOptions, TimeGrid};
use starkcool::model::{dissipators, dressed_minus, three_level_hamiltonian, ModelConfig, PhysicalParams};
use starkcool::operator::{HilbertLayout, QuantumState};
use starkcool::Execution;

fn ensemble(c: &mut Criterion) {
    let params = PhysicalParams::dynamics();
    let layout = HilbertLayout::single_mode(3, 6).unwrap();
    let config = ModelConfig::default();
    let h = three_level_hamiltonian(&layout, &params, &config).unwrap();
    let system = OpenSystem::new(h, dissipators(&layout, &params, &config).unwrap()).unwrap();
    let psi0 = QuantumState::product(&layout, &dressed_minus(3), &[1]).unwrap();
    let grid = TimeGrid::new(0.0, 50.0, 0.05, 100).unwrap();
    let seeds = derive_seeds(1, 32);
    let opts = SolverOptions::default();

    let mut group = c.benchmark_group("mc_ensemble_32");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| ensemble_run(&system, &psi0, &grid, &seeds, &opts, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ensemble);
criterion_main!(benches);
