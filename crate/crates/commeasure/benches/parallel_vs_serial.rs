//! Compares the data-parallel execution layer against its sequential
//! baseline on the two workloads that dominate verification time:
//! batches of commutator measures and extremal sampling scans.
//!
//! With default features the parallel side runs on rayon; built with
//! `--no-default-features` both sides fall through to the same loop.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use commeasure::ensembles::{
    haar_unitary, random_density, random_hermitian, random_unit_vector, task_rng,
};
use commeasure::measures::{comm_measure, unitary_proj_measure};
use commeasure::{exec, CMat, NormSpec, UnitVec};

/// Trace-norm commutator measures over a fixed batch of operator
/// pairs, the kernel behind the closed-form comparison suites.
fn measure_batch(c: &mut Criterion) {
    let spec: NormSpec = "tr".parse().unwrap();
    let mut group = c.benchmark_group("measure-batch");
    for dim in [2usize, 5] {
        let mut rng = task_rng(7, dim as u64);
        let pairs: Vec<(CMat, CMat)> = (0..256)
            .map(|_| {
                (
                    random_hermitian(dim, &mut rng),
                    random_density(dim, &mut rng).into_matrix(),
                )
            })
            .collect();
        group.bench_with_input(BenchmarkId::new("parallel", dim), &dim, |b, _| {
            b.iter(|| {
                black_box(exec::map_indexed(pairs.len(), |i| {
                    comm_measure(&pairs[i].0, &pairs[i].1, &spec).unwrap()
                }))
            })
        });
        group.bench_with_input(BenchmarkId::new("serial", dim), &dim, |b, _| {
            b.iter(|| {
                black_box(exec::map_indexed_seq(pairs.len(), |i| {
                    comm_measure(&pairs[i].0, &pairs[i].1, &spec).unwrap()
                }))
            })
        });
    }
    group.finish();
}

/// Maximizing a projection measure over a grid of unit vectors, the
/// kernel behind the sampled extremal estimates.
fn extremal_scan(c: &mut Criterion) {
    let spec: NormSpec = "op".parse().unwrap();
    let dim = 4;
    let mut rng = task_rng(11, 0);
    let v = haar_unitary(dim, &mut rng);
    let xs: Vec<UnitVec> = (0..4096).map(|_| random_unit_vector(dim, &mut rng)).collect();
    let mut group = c.benchmark_group("extremal-scan");
    group.bench_function("parallel", |b| {
        b.iter(|| {
            black_box(exec::max_indexed(xs.len(), |i| {
                (unitary_proj_measure(&v, &xs[i], &spec).unwrap(), i)
            }))
        })
    });
    group.bench_function("serial", |b| {
        b.iter(|| {
            black_box(exec::max_indexed_seq(xs.len(), |i| {
                (unitary_proj_measure(&v, &xs[i], &spec).unwrap(), i)
            }))
        })
    });
    group.finish();
}

criterion_group!(benches, measure_batch, extremal_scan);
criterion_main!(benches);
