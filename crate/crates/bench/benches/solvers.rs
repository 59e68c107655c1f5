use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use farkas_bench::{points, sampled, second_order, uniqueness};
use farkas_core::sampling::Regime;
use farkas_core::{minimize_dual, pdhg_solve, solve, Cone, SolverConfig};

fn projections(c: &mut Criterion) {
    let xs = points(16, 256, 1);
    let cones = [
        ("orthant", Cone::orthant(16)),
        ("soc", Cone::second_order(16, 1.5).unwrap()),
    ];
    let mut g = c.benchmark_group("project_256x16");
    for (name, cone) in &cones {
        g.bench_function(*name, |b| {
            b.iter(|| {
                for x in &xs {
                    black_box(cone.project(x).unwrap());
                }
            })
        });
    }
    g.finish();
}

fn dual(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut g = c.benchmark_group("dual");
    let inst = uniqueness();
    g.bench_function("uniqueness_example", |b| {
        b.iter(|| minimize_dual(black_box(&inst), &cfg).unwrap())
    });
    let feasible = sampled(Regime::Feasible, 16, 8, 8, 0.1, 2);
    g.bench_function("feasible_8x8_eps0.1", |b| {
        b.iter(|| {
            for inst in &feasible {
                black_box(minimize_dual(inst, &cfg).unwrap());
            }
        })
    });
    g.finish();
}

fn decisions(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    let soc = second_order();
    g.bench_function("second_order_example", |b| {
        b.iter(|| solve(black_box(&soc), &cfg).unwrap())
    });
    let infeasible = sampled(Regime::Infeasible, 8, 4, 5, 0.1, 3);
    g.bench_function("infeasible_4x5_eps0.1", |b| {
        b.iter(|| {
            for inst in &infeasible {
                black_box(solve(inst, &cfg).unwrap());
            }
        })
    });
    let feasible = sampled(Regime::Feasible, 4, 4, 5, 0.0, 4);
    g.bench_function("pdhg_feasible_4x5", |b| {
        b.iter(|| {
            for inst in &feasible {
                black_box(pdhg_solve(inst, &cfg).unwrap());
            }
        })
    });
    g.finish();
}

criterion_group!(benches, projections, dual, decisions);
criterion_main!(benches);
