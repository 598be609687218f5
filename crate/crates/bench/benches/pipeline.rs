use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use entropik_bench::bundled;
use entropik_core::cases::build_tree;
use entropik_core::liu;
use entropik_core::split::analyze_solution_set;

fn solution_set(c: &mut Criterion) {
    let mut g = c.benchmark_group("solution-set");
    for name in ["gas1d", "fluid2d", "nonsimple2d", "granular2d"] {
        let m = bundled(name);
        if name == "granular2d" {
            g.sample_size(10);
        }
        g.bench_function(name, |b| b.iter(|| analyze_solution_set(black_box(&m)).unwrap()));
    }
    g.finish();
}

fn mueller_liu(c: &mut Criterion) {
    let mut g = c.benchmark_group("mueller-liu");
    for name in ["gas1d", "fluid2d", "nonsimple2d"] {
        let m = bundled(name);
        g.bench_function(name, |b| {
            b.iter(|| {
                let (x, lr) = liu::analyze_liu(black_box(&m), None).unwrap();
                liu::eliminate_multipliers(&x, &lr)
            })
        });
    }
    g.finish();
}

fn case_tree(c: &mut Criterion) {
    let m = bundled("gas1d");
    let r = analyze_solution_set(&m).unwrap();
    c.bench_function("case-tree/gas1d", |b| b.iter(|| build_tree(&m, black_box(&r.system), &[], 4)));
}

criterion_group!(benches, solution_set, mueller_liu, case_tree);
criterion_main!(benches);
