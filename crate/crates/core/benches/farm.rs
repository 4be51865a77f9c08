use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use kac_core::coupling::replica_seeds;
use kac_core::farm;
use kac_core::initial::InitialLaw;
use kac_core::simulator::{run, SimConfig};
use kac_core::transport::{w2_squared_exact, EmpiricalMeasure};
use kac_core::KernelSpec;

fn replica(n: usize, r: usize) -> Vec<kac_core::Vec3> {
    let (init_seed, dyn_seed) = replica_seeds(7, n, r);
    let cfg = SimConfig {
        n_particles: n,
        kernel: KernelSpec::power_law(0.5, 0.5).unwrap(),
        cutoff_k: 8.0,
        horizon_t: 0.5,
        snapshot_times: vec![0.5],
        initial: InitialLaw::gaussian(1.0, init_seed),
        seed: dyn_seed,
    };
    run(&cfg).unwrap().pop().unwrap().velocities
}

fn replica_farm(c: &mut Criterion) {
    let replicas: Vec<usize> = (0..8).collect();
    let mut group = c.benchmark_group("replica_farm");
    group.sample_size(10);
    for n in [256usize, 1024] {
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| farm::map_sequential(&replicas, |&r| replica(n, r)))
        });
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
            b.iter(|| farm::map(&replicas, |&r| replica(n, r)))
        });
    }
    group.finish();
}

fn w2_farm(c: &mut Criterion) {
    let n = 256;
    let clouds: Vec<EmpiricalMeasure> = (0..8).map(|r| EmpiricalMeasure::new(replica(n, r)).unwrap()).collect();
    let pairs: Vec<(usize, usize)> = (0..8).map(|i| (i, (i + 1) % 8)).collect();
    let mut group = c.benchmark_group("w2_farm");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| farm::map_sequential(&pairs, |&(i, j)| w2_squared_exact(&clouds[i], &clouds[j]).unwrap()))
    });
    group.bench_function("parallel", |b| {
        b.iter(|| farm::map(&pairs, |&(i, j)| w2_squared_exact(&clouds[i], &clouds[j]).unwrap()))
    });
    group.finish();
    black_box(farm::is_parallel());
}

criterion_group!(benches, replica_farm, w2_farm);
criterion_main!(benches);
