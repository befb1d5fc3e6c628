use std::collections::BTreeSet;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hill_circuits::analysis::ScanSpec;
use hill_circuits::hill::decompose;
use hill_circuits::models::FIG5;
use hill_circuits::{Caps, Execution, Model};

const POLICIES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bench_decompose(c: &mut Criterion) {
    let mut group = c.benchmark_group("decompose");
    let caps = Caps::default();
    for b in [4, 9] {
        let g = FIG5.build(Model::G4B { b }, 1.0).unwrap();
        for (name, exec) in POLICIES {
            group.bench_with_input(BenchmarkId::new(name, format!("G4B:{b}")), &g, |bch, g| {
                bch.iter(|| decompose(black_box(g), &caps, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    let spec = ScanSpec {
        preset: "fig5".into(),
        model: "G4L:1".into(),
        sizes: vec![2, 3, 4, 5],
        t: vec![0.1, 0.3, 1.0, 3.0, 10.0, 30.0],
        sigma: vec![1.0],
    };
    let caps = Caps::default();
    let skip = BTreeSet::new();
    for (name, exec) in POLICIES {
        group.bench_function(name, |bch| {
            bch.iter(|| {
                hill_circuits::analysis::run_scan(black_box(&spec), &caps, exec, &skip).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_decompose, bench_scan);
criterion_main!(benches);
